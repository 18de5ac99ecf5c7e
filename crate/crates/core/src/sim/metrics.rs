use serde::{Deserialize, Serialize};

use super::replay::ServingRecord;
use crate::supernet::EncodedVector;
use crate::{Error, Result};

/// `||min(SN, G)||_2 / ||SN||_2`.
pub fn cache_hit_ratio(subnet: &EncodedVector, cached: &EncodedVector) -> Result<f64> {
    let covered = subnet.elementwise_min(cached)?;
    let denom = subnet.l2_norm();
    if denom == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok((covered.l2_norm() / denom).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub queries: usize,
    pub mean_latency_s: f64,
    pub p50_latency_s: f64,
    pub p95_latency_s: f64,
    pub p99_latency_s: f64,
    pub max_latency_s: f64,
    pub mean_table_latency_s: f64,
    pub mean_accuracy: f64,
    pub violation_rate: f64,
    pub fallback_rate: f64,
    /// Fraction of queries with served latency <= L_t.
    pub slo_attainment: f64,
    pub total_energy_j: f64,
    pub mean_hit_ratio: f64,
    pub cache_updates: usize,
    pub total_fill_bytes: u64,
    pub total_weight_miss_bytes: u64,
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn aggregate(records: &[ServingRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let n = records.len() as f64;
    let mean = |f: fn(&ServingRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let rate = |f: fn(&ServingRecord) -> bool| records.iter().filter(|r| f(r)).count() as f64 / n;
    let mut lat: Vec<f64> = records.iter().map(|r| r.served_latency_s).collect();
    lat.sort_by(f64::total_cmp);
    Ok(Summary {
        queries: records.len(),
        mean_latency_s: mean(|r| r.served_latency_s),
        p50_latency_s: percentile(&lat, 0.50),
        p95_latency_s: percentile(&lat, 0.95),
        p99_latency_s: percentile(&lat, 0.99),
        max_latency_s: *lat.last().expect("non-empty"),
        mean_table_latency_s: mean(|r| r.table_latency_s),
        mean_accuracy: mean(|r| r.served_accuracy),
        violation_rate: rate(|r| r.violated),
        fallback_rate: rate(|r| r.fallback),
        slo_attainment: rate(|r| r.served_latency_s <= r.latency_target_s),
        total_energy_j: records.iter().map(|r| r.energy_j).sum(),
        mean_hit_ratio: mean(|r| r.hit_ratio),
        cache_updates: records.iter().filter(|r| r.cache_updated).count(),
        total_fill_bytes: records.iter().map(|r| r.fill_bytes).sum(),
        total_weight_miss_bytes: records.iter().map(|r| r.weight_miss_bytes).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> EncodedVector {
        EncodedVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn hit_ratio_cases() {
        let sn = v(&[4.0, 3.0, 8.0, 4.0]);
        assert_eq!(cache_hit_ratio(&sn, &sn).unwrap(), 1.0);
        assert_eq!(cache_hit_ratio(&sn, &v(&[0.0; 4])).unwrap(), 0.0);
        let r = cache_hit_ratio(&sn, &v(&[2.0, 3.0, 4.0, 4.0])).unwrap();
        assert!((r - (45.0f64 / 105.0).sqrt()).abs() < 1e-12);
        assert!(matches!(cache_hit_ratio(&v(&[0.0; 4]), &sn), Err(Error::UndefinedRatio)));
    }

    #[test]
    fn percentiles_nearest_rank() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&xs, 0.5), 50.0);
        assert_eq!(percentile(&xs, 0.95), 95.0);
        assert_eq!(percentile(&[7.0], 0.99), 7.0);
    }

    #[test]
    fn empty_aggregate() {
        assert!(matches!(aggregate(&[]), Err(Error::EmptyAggregate)));
    }
}
