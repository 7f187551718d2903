use sddsep::bench::{
    blowup_csv, compress_blowup, export, mutated_fn_artifact, separation, size_csv, verify,
    verify_artifact, Construction, ExportFormat, ExportObject, OrderingSpec, RunOptions,
};
use sddsep::boolfn::PrimeId;
use sddsep::{Execution, SddEnv, Vtree};

fn det() -> RunOptions {
    RunOptions {
        deterministic: true,
        ..Default::default()
    }
}

#[test]
fn separation_table_2_to_10() {
    let rows = separation(2, 10, &OrderingSpec::Natural, &OrderingSpec::Natural, det()).unwrap();
    assert_eq!(rows.len(), 18);
    let fn_arcs: Vec<usize> = rows
        .iter()
        .filter(|r| r.construction == Construction::SddFn)
        .map(|r| r.arcs)
        .collect();
    assert!(fn_arcs.windows(2).all(|w| w[0] < w[1]));
    for (r, n) in fn_arcs.iter().zip(2usize..) {
        assert!(*r <= 6 * n * n * n, "n={n}: {r}");
    }
    let csv = size_csv(&rows).unwrap();
    assert!(csv.starts_with("function,n,construction,nodes,arcs,ms,descriptor\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 19);
}

#[test]
fn separation_single_12() {
    let rows = separation(12, 12, &OrderingSpec::Natural, &OrderingSpec::Natural, det()).unwrap();
    let kinds: Vec<_> = rows.iter().map(|r| r.construction).collect();
    assert_eq!(kinds, [Construction::SddFn, Construction::ObddMin]);
    assert_eq!(rows[1].nodes, 137);
}

#[test]
fn separation_is_deterministic_across_schedules() {
    let par = separation(3, 9, &OrderingSpec::Reverse, &OrderingSpec::Natural, det()).unwrap();
    let seq_opts = RunOptions {
        exec: Execution::Sequential,
        deterministic: true,
    };
    let seq = separation(3, 9, &OrderingSpec::Reverse, &OrderingSpec::Natural, seq_opts).unwrap();
    assert_eq!(size_csv(&par).unwrap(), size_csv(&seq).unwrap());
}

#[test]
fn explicit_sigma_must_fit_every_n() {
    let sigma: OrderingSpec = "3,1,2".parse().unwrap();
    assert!(separation(3, 3, &sigma, &OrderingSpec::Natural, det()).is_ok());
    assert!(separation(3, 4, &sigma, &OrderingSpec::Natural, det()).is_err());
}

#[test]
fn compression_tracks_the_fixed_order_obdd() {
    let rows = compress_blowup(1, 12, det()).unwrap();
    assert_eq!(rows[0].arcs_before, rows[0].arcs_after);
    for r in &rows[1..] {
        // two merged primes (HWB and its negation) plus the root's 6 arcs
        assert!(r.arcs_after <= 6 + 12 * r.obdd_fixed_nodes, "{r:?}");
        assert!(r.arcs_after >= 6 * r.obdd_fixed_nodes, "{r:?}");
    }
    let ratio = |n: usize| rows[n - 1].arcs_after as f64 / rows[n - 1].arcs_before as f64;
    assert!(ratio(12) > ratio(8));
    assert!(blowup_csv(&rows).unwrap().starts_with("n,arcs_before,arcs_after"));
    assert!(compress_blowup(1, 17, det()).is_err());
}

#[test]
fn verify_passes_at_1_and_8() {
    for n in [1, 8] {
        let report = verify(n).unwrap();
        assert!(report.passed(), "{report}");
    }
    assert!(verify(13).is_err());
}

#[test]
fn mutated_artifact_names_s5() {
    let art = mutated_fn_artifact(4, PrimeId::Full).unwrap();
    let checks = verify_artifact(&art).unwrap();
    let validate = checks.iter().find(|c| c.name == "fn.validate").unwrap();
    assert!(!validate.passed);
    assert!(validate.to_string().contains("S5"), "{validate}");
    assert!(!validate.detail.contains("S4"));
}

#[test]
fn export_formats() {
    let vt_text = export(&ExportObject::FnVtree(4), ExportFormat::Vtree).unwrap();
    let vt = Vtree::parse(&vt_text).unwrap();
    assert_eq!(vt.serialize(), vt_text);

    let dot = export(&"exact:4:2".parse().unwrap(), ExportFormat::Dot).unwrap();
    assert!(dot.starts_with("digraph") && dot.trim_end().ends_with('}'));

    let sdd = export(&ExportObject::HwbSdd(4), ExportFormat::Sdd).unwrap();
    let declared: usize = sdd.lines().next().unwrap()["sdd ".len()..].parse().unwrap();
    let node_lines = sdd.lines().skip(1).filter(|l| !l.starts_with('c')).count();
    assert_eq!(declared, node_lines);
    let hwb_vt = Vtree::parse(&export(&ExportObject::HwbSdd(4), ExportFormat::Vtree).unwrap()).unwrap();
    let (env, root) = SddEnv::parse(hwb_vt, &sdd).unwrap();
    assert!(env.validate(root).unwrap().is_valid());

    let obdd_sdd = export(&"prime:5:P2_1@5,4,3,2,1".parse().unwrap(), ExportFormat::Sdd).unwrap();
    assert!(obdd_sdd.starts_with("sdd "));
    assert!(export(&ExportObject::FnVtree(3), ExportFormat::Sdd).is_err());
}
