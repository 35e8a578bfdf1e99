use thetaforge::construct::{
    build_even_with_h, build_few_paths_graph, random_algebraic_graph, Caps, ConstructionParams,
};
use thetaforge::explore::{run_certifier, CertifierOptions, FinalVerdict};
use thetaforge::ffield::Field;
use thetaforge::graph::{find_bad_pairs, PairScope};
use thetaforge::mpoly::PolynomialSystem;
use thetaforge::stats::{dichotomy_scan, estimate_moments};
use thetaforge::theta::{contains_theta, ThetaOptions, Verdict};

#[test]
fn sidecar_regenerates_graph() {
    let field = Field::new(5).unwrap();
    let (g, system) = random_algebraic_graph(2, &field, 8, 17).unwrap();
    let back = PolynomialSystem::from_sidecar(&system.to_sidecar(), &field).unwrap();
    for (u, v, _) in g.edges().take(50) {
        let mut point = thetaforge::construct::vertex_coordinates(u, 5, 2);
        point.extend(thetaforge::construct::vertex_coordinates(v - 25, 5, 2));
        assert!(back.vanishes_raw(&field, &point));
    }
}

#[test]
fn few_paths_graph_is_theta_free_where_expected() {
    // at most T-1 paths of length <= 3 between any pair, so no theta(3, T)
    let t_eff = 3;
    let (g, report) =
        build_few_paths_graph(3, 54, t_eff, None, 2, PairScope::All, Caps::default()).unwrap();
    assert_eq!(report.rescan_bad_pairs, 0);
    let cert = contains_theta(&g, 3, t_eff as usize, &ThetaOptions::default()).unwrap();
    assert_eq!(cert.verdict, Verdict::Free);
    assert!(cert.exact);
}

#[test]
fn even_construction_removes_bad_pairs() {
    let params = ConstructionParams::new(2, 32, 50, 4, 3);
    let (g, report) = build_even_with_h(&params, 2).unwrap();
    assert_eq!(report.q, 5);
    assert_eq!(report.threshold, 16);
    assert_eq!(report.edges_per_sample.len(), 2);
    assert_eq!(
        report.multigraph_edges,
        report.edges_per_sample.iter().sum::<usize>() as u64
    );
    assert_eq!(
        report.simple_edges as u64 + report.multiple_edges,
        report.multigraph_edges
    );
    // every surviving pair of the simplified graph has fewer than T h^ell paths
    assert!(find_bad_pairs(&g, report.threshold, 2, PairScope::All)
        .pairs
        .is_empty());
}

#[test]
fn certifier_on_random_algebraic_graph() {
    let field = Field::new(3).unwrap();
    let (g, _) = random_algebraic_graph(2, &field, 8, 5).unwrap();
    let cert = run_certifier(&g, 2, 3, &CertifierOptions::default()).unwrap();
    assert!(cert.structural_ok);
    assert_eq!(cert.stages.len(), 2);
    assert_eq!(cert.comparison.verdict, FinalVerdict::Vacuous);
    if let Some(w) = &cert.witness {
        w.validate(&g, 2, 3).unwrap();
    }
    let json = serde_json::to_value(&cert).unwrap();
    assert!(json["constants"].is_object());
}

#[test]
fn dichotomy_and_moments_run_on_small_grid() {
    let scan = dichotomy_scan(2, 5, &[0, 1], 3, None).unwrap();
    assert_eq!(scan.bands.len(), 1);
    let band = &scan.bands[0];
    assert_eq!(band.small + band.middle + band.large, band.pairs);
    // same-side pairs of two seeds: 2 * 2 * C(25, 2)
    assert_eq!(band.pairs, 1200);
    let moments = estimate_moments(2, 5, 1, &[0, 1, 2], 40, None).unwrap();
    assert_eq!(moments.estimates.len(), 2);
    assert!(moments.estimates.iter().all(|e| e.samples == 120));
}
