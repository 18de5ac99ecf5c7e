//! Build the candidate SubGraph set and the SubNet x SubGraph latency table,
//! then save and reload it.
use sgs::accel::AccelModel;
use sgs::fixtures;
use sgs::table::{build_candidate_set, build_table, CandidateParams, LatencyTable};

fn main() -> sgs::Result<()> {
    let net = fixtures::resnet50_like();
    let subs = fixtures::resnet50_subnets();
    let hw = fixtures::hw_edge();
    let set = build_candidate_set(&net, &subs, &hw, &CandidateParams { max_columns: 12, ..Default::default() })?;
    let (lo, hi) = set.byte_range();
    println!("{} candidates, {lo}..{hi} bytes, PB {}", set.len(), set.pb_bytes());

    let table = build_table(&AccelModel::new(&net, hw)?, &subs, &set)?;
    print!("{:8}", "");
    for id in table.col_ids() {
        print!("{:>9.8}", id);
    }
    println!();
    for (i, id) in table.row_ids().iter().enumerate() {
        print!("{id:8}");
        for v in table.row(i) {
            print!("{:>9.4}", v * 1e3);
        }
        println!("  ms");
    }

    let dir = std::env::temp_dir().join("sgs-latency-table-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("table.txt");
    table.save(&path)?;
    let back = LatencyTable::load(&path)?;
    back.check_hardware(&hw)?;
    assert_eq!(back, table);
    println!("saved and reloaded {} (hw {})", path.display(), back.fingerprint());
    Ok(())
}
