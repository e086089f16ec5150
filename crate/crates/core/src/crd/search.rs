use log::debug;

use super::outer::validate;
use super::{crd_inner, crd_outer, sweep_order_from_labels, CrdParams, InnerKind};
use crate::graph::{sweep_cut, CutResult, Graph, NodeId};
use crate::{Error, Ratio, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub outer: CrdParams,
    /// Factor applied to `phi` between extra steps, in `(0, 1)`.
    pub shrink: Ratio,
    /// Smallest `phi` tried.
    pub floor: Ratio,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            outer: CrdParams::default(),
            shrink: Ratio::new(1, 2).unwrap(),
            floor: Ratio::new(1, 1000).unwrap(),
        }
    }
}

fn keep_better(best: &mut Option<CutResult>, candidate: Option<CutResult>) {
    if let Some(c) = candidate {
        if best.as_ref().is_none_or(|b| c.conductance < b.conductance) {
            *best = Some(c);
        }
    }
}

/// Runs the diffusion, then repeats one extra inner step on the doubled
/// terminal mass with `phi` shrinking geometrically, for as long as the step
/// still stops at a bottleneck and `phi` stays at or above the floor.
/// Returns the lowest-conductance cut seen.
pub fn conductance_search(g: &Graph, seed: NodeId, params: &SearchParams) -> Result<CutResult> {
    if params.shrink.is_zero() || params.shrink >= Ratio::ONE {
        return Err(Error::input(format!("shrink = {} outside (0, 1)", params.shrink)));
    }
    if params.floor.is_zero() {
        return Err(Error::input("floor must be positive"));
    }
    validate(g, seed, &params.outer)?;
    let run = crd_outer(g, seed, &params.outer)?;
    if params.floor > params.outer.phi {
        return run
            .cut
            .or(run.best_sweep)
            .ok_or_else(|| Error::domain("diffusion produced no proper cut"));
    }
    let mut best = run.cut.clone();
    keep_better(&mut best, run.best_sweep.clone());

    let mut mass = run.mass;
    if 2 * mass.total() as u128 <= g.total_volume() as u128 {
        mass.double()?;
        let mut phi = params.outer.phi;
        loop {
            phi = phi
                .checked_mul(params.shrink)
                .ok_or_else(|| Error::Overflow("phi * shrink".into()))?;
            if phi < params.floor {
                break;
            }
            let outcome = crd_inner(g, mass.clone(), phi)?;
            if outcome.kind == InnerKind::FullStep {
                debug!("seed {seed}: full step at phi = {phi}, search ends");
                break;
            }
            keep_better(&mut best, outcome.cut.clone());
            let order = sweep_order_from_labels(&outcome.labels, &outcome.mass, g);
            match sweep_cut(g, &order) {
                Ok(c) => keep_better(&mut best, Some(c)),
                Err(Error::Domain(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    best.ok_or_else(|| Error::domain("diffusion produced no proper cut"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crd::crd_outer;
    use crate::graph::generate;

    #[test]
    fn never_worse_than_the_outer_cut() {
        let (g, _) = generate::planted_clique(10, 10, 10).unwrap();
        let params = SearchParams {
            outer: CrdParams { iterations: Some(10), ..CrdParams::default() },
            ..SearchParams::default()
        };
        let run = crd_outer(&g, 3, &params.outer).unwrap();
        let found = conductance_search(&g, 3, &params).unwrap();
        let k = run.cut.unwrap();
        assert!(found.conductance <= k.conductance);
    }

    #[test]
    fn floor_above_start_skips_search() {
        let (g, _) = generate::planted_clique(10, 10, 10).unwrap();
        let params = SearchParams {
            outer: CrdParams { iterations: Some(10), ..CrdParams::default() },
            floor: Ratio::new(1, 2).unwrap(),
            ..SearchParams::default()
        };
        let run = crd_outer(&g, 3, &params.outer).unwrap();
        let found = conductance_search(&g, 3, &params).unwrap();
        assert_eq!(found, run.cut.unwrap());
    }

    #[test]
    fn parameter_checks() {
        let g = generate::grid(4, 4, 0.0, 0).unwrap();
        let bad = SearchParams { shrink: Ratio::ONE, ..SearchParams::default() };
        assert!(conductance_search(&g, 0, &bad).is_err());
        let bad = SearchParams { floor: Ratio::ZERO, ..SearchParams::default() };
        assert!(conductance_search(&g, 0, &bad).is_err());
    }
}
