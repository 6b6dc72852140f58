use crate::error::{contract_err, Result};
use crate::sim::TtiObservation;

/// Network input for one TTI: `I_n / max I` followed by `T_n / max T`.
pub fn normalize_state(obs: &TtiObservation) -> Result<Vec<f64>> {
    normalize_rates(&obs.inst_rate, &obs.avg_rate)
}

pub fn normalize_rates(inst: &[f64], avg: &[f64]) -> Result<Vec<f64>> {
    if inst.len() != avg.len() || inst.is_empty() {
        return Err(contract_err("rate vectors must be non-empty and equally long"));
    }
    let mut out = Vec::with_capacity(2 * inst.len());
    for part in [inst, avg] {
        if part.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(contract_err("rates must be finite and non-negative"));
        }
        let max = part.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(contract_err("at least one rate must be positive"));
        }
        out.extend(part.iter().map(|x| x / max));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divides_each_half_by_its_max() {
        assert_eq!(normalize_rates(&[2.0, 4.0], &[1.0, 1.0]).unwrap(), vec![0.5, 1.0, 1.0, 1.0]);
        assert_eq!(normalize_rates(&[3.0; 3], &[7.0; 3]).unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(normalize_rates(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(normalize_rates(&[1.0], &[1.0, 1.0]).is_err());
        assert!(normalize_rates(&[1.0, f64::NAN], &[1.0, 1.0]).is_err());
    }
}
