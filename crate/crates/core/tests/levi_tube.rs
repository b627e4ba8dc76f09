use cuspdisc::funcpair::FunctionPair;
use cuspdisc::hypersurface::{ConeCutoff, HypersurfaceModel};
use cuspdisc::levi::*;

fn tube() -> HypersurfaceModel {
    HypersurfaceModel::tube_failure(0.4, 0.8).unwrap()
}

fn vertex_region() -> Region {
    Region::new(0.005, 0.015, -0.002, 0.002).unwrap()
}

#[test]
fn tube_is_subharmonic_near_the_vertex_only() {
    let near = laplacian_grid(&tube(), &vertex_region(), 400, 0.0).unwrap();
    assert!(near.subharmonic(), "{near:?}");
    assert!(near.stencil_mismatch < 0.01);
    // e^{-1/|y|^a} is superharmonic once |y| > (a/(a+1))^{1/a}, about 0.0436 here.
    let wide = Region::new(0.05, 0.3, -0.05, 0.05).unwrap();
    let far = laplacian_grid(&tube(), &wide, 200, 0.0).unwrap();
    assert!(!far.subharmonic());
    assert!(far.argmin.im.abs() > 0.0436);
}

#[test]
fn tube_bump_exists() {
    let pair = FunctionPair::exp(0.8).unwrap();
    let margin = check_levi_margin(
        &tube(),
        &pair,
        &annular_cone_samples(&pair, 0.5, 0.8).unwrap(),
        0.0,
    )
    .unwrap();
    assert!(margin > 0.0);
    let spec = ConeBumpSpec::new(pair, 0.5, 0.8, 1.0).unwrap();
    let built = build_bump(&tube(), &spec, 0.0).unwrap();
    assert!(built.bounds.first < 20.0 && built.bounds.second < 20.0);
    let cmp = compare_bump(
        &tube(),
        &built.model,
        &region_samples(&vertex_region(), 100),
        &inner_cone_samples(&pair, 0.5).unwrap(),
        0.0,
    )
    .unwrap();
    assert!(
        cmp.max_excess <= 0.0 && cmp.min_gap_on_sector > 0.0 && cmp.value_at_origin == 0.0,
        "{cmp:?}"
    );
    let lap = laplacian_grid(&built.model, &vertex_region(), 400, 0.0).unwrap();
    assert!(lap.subharmonic(), "{lap:?}");
}

#[test]
fn admissible_eta_is_grid_stable_and_grows_with_the_cone() {
    let pair = FunctionPair::exp(0.8).unwrap();
    let mut last = 0.0;
    for a1 in [0.6, 0.7, 0.8, 0.9] {
        let cone = ConeCutoff::new(pair, 0.5, a1).unwrap();
        let coarse = max_admissible_eta(&tube(), &cone, &vertex_region(), 200, 0.0).unwrap();
        let fine = max_admissible_eta(&tube(), &cone, &vertex_region(), 400, 0.0).unwrap();
        assert!(fine.eta_star > 0.0 && !fine.capped);
        assert!((coarse.eta_star - fine.eta_star).abs() < 0.2 * fine.eta_star);
        // A wider cone has a gentler cut-off, so more amplitude is admissible.
        assert!(fine.eta_star > last);
        last = fine.eta_star;
    }
}
