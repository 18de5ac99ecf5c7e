#!/usr/bin/env python3
"""Regenerates the bundled SuperNet fixtures.

The layer geometry is a reduced-width OFA-style ResNet50 at 160x160 input and
an OFA-style MobileNetV3 at 224x224 input. Accuracies are synthetic, monotone
in model size, and only serve as scheduler metadata.

Usage: python3 make_fixtures.py  (writes next to this script)
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
FRACS = [0.5, 0.75, 1.0]


def make_div(v, d):
    n = max(d, int(v + d / 2) // d * d)
    if n < 0.9 * v:
        n += d
    return n


def layer(name, k, c, r, xo, stride=1, **extra):
    d = dict(name=name, k=k, c=c, r=r, s=r, xo=xo, yo=xo, stride=stride)
    d.update(extra)
    return d


def resnet50_like(res=160, widths=(208, 416, 736, 1472), e_max=0.4, stem=64):
    depth_choices = [[2, 3, 4], [2, 3, 4], [4, 5, 6], [2, 3, 4]]
    layers, stages = [], []
    x = res // 2
    layers.append(layer("stem", stem, 3, 7, x, stride=2))
    x //= 2  # max-pool
    cin = stem
    for si, (w, dch) in enumerate(zip(widths, depth_choices)):
        stages.append(dict(name=f"stage{si + 1}", depth_choices=dch))
        kmax = make_div(w * e_max, 16)
        xo = x if si == 0 else x // 2
        for b in range(max(dch)):
            p = f"s{si + 1}b{b + 1}"
            c_in = cin if b == 0 else w
            xin = x if b == 0 else xo
            st = xin // xo
            blk = dict(stage=si, block=b)
            layers.append(layer(p + "c1", kmax, c_in, 1, xin, expand_choices=FRACS, **blk))
            layers.append(layer(p + "c2", kmax, kmax, 3, xo, stride=st, k_tie=p + "c1", c_tie=p + "c1", **blk))
            layers.append(layer(p + "c3", w, kmax, 1, xo, c_tie=p + "c2", **blk))
            if b == 0:
                layers.append(layer(p + "ds", w, c_in, 1, xo, stride=st, **blk))
        x, cin = xo, w
    layers.append(layer("fc", 1000, cin, 1, 1))
    return dict(name="resnet50-like", stages=stages, layers=layers)


def mobv3_like(res=224):
    widths = (24, 40, 80, 112, 160)
    strides = (2, 2, 2, 1, 2)
    kernels = (3, 5, 3, 3, 5)
    layers, stages = [], []
    x = res // 2
    layers.append(layer("stem", 16, 3, 3, x, stride=2))
    layers.append(layer("b0dw", 16, 1, 3, x, depthwise=True))
    layers.append(layer("b0pw", 16, 16, 1, x))
    cin = 16
    for si, (w, st, k) in enumerate(zip(widths, strides, kernels)):
        stages.append(dict(name=f"stage{si + 1}", depth_choices=[2, 3, 4]))
        xo = x // st
        for b in range(4):
            p = f"s{si + 1}b{b + 1}"
            c_in = cin if b == 0 else w
            xin = x if b == 0 else xo
            kmax = 6 * c_in
            blk = dict(stage=si, block=b)
            layers.append(layer(p + "ex", kmax, c_in, 1, xin, expand_choices=FRACS, **blk))
            layers.append(layer(p + "dw", kmax, 1, k, xo, stride=xin // xo, k_tie=p + "ex", depthwise=True, **blk))
            layers.append(layer(p + "pw", w, kmax, 1, xo, c_tie=p + "dw", **blk))
        x, cin = xo, w
    layers.append(layer("head", 960, cin, 1, x))
    layers.append(layer("feat", 1280, 960, 1, 1))
    layers.append(layer("fc", 1000, 1280, 1, 1))
    return dict(name="mobv3-like", stages=stages, layers=layers)


def pick(pid, acc, depths, default, overrides=None):
    return dict(id=pid, accuracy=acc, depths=depths,
                expand=dict(default=default, layers=overrides or {}))


RESNET_PICKS = [
    pick("r50-xs", 0.748, [2, 2, 4, 2], 0.5, {"s1b2c1": 0.75}),
    pick("r50-s", 0.755, [2, 3, 4, 2], 0.5, {"s1b1c1": 0.75}),
    pick("r50-m", 0.768, [3, 3, 5, 3], 0.75),
    pick("r50-l", 0.777, [3, 4, 5, 3], 0.75, {"s4b1c1": 1.0, "s4b2c1": 1.0}),
    pick("r50-xl", 0.786, [4, 4, 6, 3], 1.0, {"s4b3c1": 0.75}),
    pick("r50-xxl", 0.792, [4, 4, 6, 4], 1.0, {"s4b4c1": 0.75, "s3b6c1": 0.75}),
]

MOBV3_PICKS = [
    pick("mb-xs", 0.735, [2, 2, 2, 2, 2], 0.5, {"s1b2ex": 0.75}),
    pick("mb-s", 0.745, [2, 2, 3, 2, 2], 0.5, {"s1b1ex": 0.75}),
    pick("mb-m", 0.756, [3, 3, 3, 3, 3], 0.75),
    pick("mb-ml", 0.764, [3, 4, 3, 4, 3], 0.75, {"s5b1ex": 1.0, "s5b2ex": 1.0, "s5b3ex": 1.0}),
    pick("mb-l", 0.771, [4, 4, 4, 3, 4], 0.75),
    pick("mb-xl", 0.778, [4, 4, 4, 4, 4], 1.0, {"s1b1ex": 0.75, "s2b4ex": 0.75}),
    pick("mb-xxl", 0.783, [4, 4, 4, 4, 4], 1.0),
]


def dump(obj, name):
    # one layer / stage / pick per line keeps the files diff-able
    lines = ["{"]
    items = list(obj.items())
    for i, (key, val) in enumerate(items):
        sep = "," if i + 1 < len(items) else ""
        if isinstance(val, list):
            lines.append(f' "{key}": [')
            for j, v in enumerate(val):
                inner = "," if j + 1 < len(val) else ""
                lines.append("  " + json.dumps(v) + inner)
            lines.append(" ]" + sep)
        else:
            lines.append(f" {json.dumps(key)}: {json.dumps(val)}{sep}")
    lines.append("}")
    with open(os.path.join(HERE, name), "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    dump(resnet50_like(), "resnet50_like.supernet.json")
    dump(dict(supernet="resnet50-like", picks=RESNET_PICKS), "resnet50_like.picks.json")
    dump(mobv3_like(), "mobv3_like.supernet.json")
    dump(dict(supernet="mobv3-like", picks=MOBV3_PICKS), "mobv3_like.picks.json")
