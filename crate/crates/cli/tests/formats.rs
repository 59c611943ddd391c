mod common;

use common::{fixture, fixture_system};
use slin::document::{read_lift, DocumentError, LiftDocument, SCHEMA};
use slin::{dot, traj};
use slin_core::depgraph::{build_skeleton, build_wdg, scc_decomposition};
use slin_core::verify::PolyField;
use slin_core::{simulate, superlinearize, verify_symbolic};

#[test]
fn document_round_trips_exactly() {
    for name in ["motivating.ode", "five_dim.ode", "harmonic.ode", "affine.ode"] {
        let sys = fixture_system(name);
        let sl = superlinearize(&sys).unwrap();
        let doc = LiftDocument::from_lift(&sl);
        assert_eq!(doc.schema, SCHEMA);
        let json = doc.to_json();
        let back = LiftDocument::from_json(&json).unwrap();
        assert_eq!(back, doc, "{name}");
        let lifted = back.to_lift().unwrap();
        assert_eq!(lifted.matrix(), sl.matrix(), "{name}");
        assert_eq!(lifted.offset(), sl.offset(), "{name}");
        assert_eq!(lifted.observables(), sl.observables(), "{name}");
        assert_eq!(LiftDocument::from_lift(&lifted).to_json(), json, "{name}");
    }
}

#[test]
fn rationals_are_strings() {
    let text = std::fs::read_to_string(fixture("five_dim_reference_lift.json")).unwrap();
    let doc = LiftDocument::from_json(&text).unwrap();
    assert!(doc.a.iter().flatten().any(|s| s == "1485/2"));
    let sl = doc.to_lift().unwrap();
    assert!(verify_symbolic(&fixture_system("five_dim.ode"), &sl).unwrap().is_pass());
}

fn motivating_doc() -> LiftDocument {
    LiftDocument::from_lift(&superlinearize(&fixture_system("motivating.ode")).unwrap())
}

fn schema_error(doc: &LiftDocument) -> String {
    match doc.to_lift() {
        Err(DocumentError::Schema(msg)) => msg,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn schema_violations_are_reported() {
    let mut d = motivating_doc();
    d.schema = "slin-lift/0".into();
    assert!(schema_error(&d).contains("unsupported schema"));

    let mut d = motivating_doc();
    d.m = 2;
    assert!(schema_error(&d).contains("m = 2"));

    let mut d = motivating_doc();
    d.a[0].pop();
    assert!(schema_error(&d).contains("A must be 3x3"));

    let mut d = motivating_doc();
    d.d[0] = "0.5".into();
    assert!(schema_error(&d).contains("D[0]"));

    let mut d = motivating_doc();
    d.observables[0].expansion = "y^3".into();
    assert!(schema_error(&d).contains("expansion of"));

    let mut d = motivating_doc();
    d.observables[0].definition = "y^".into();
    assert!(schema_error(&d).contains("definition of"));

    assert!(matches!(read_lift("[]"), Err(DocumentError::Json(_))));
}

#[test]
fn dot_lists_every_edge_and_component() {
    let sys = fixture_system("five_dim.ode");
    let g = build_wdg(&sys);
    let scc = scc_decomposition(&g);
    let skeleton = build_skeleton(&g, &scc).unwrap();
    let text = dot::render(&g, &scc, &skeleton);
    assert_eq!(text.matches(" -> v").count(), g.edges().count());
    for u in 0..skeleton.num_nodes() {
        assert!(text.contains(&format!("u{u} [label=\"u_{u}\"")));
    }
    assert!(text.contains("tooltip=\"x1, x2\""));
    assert_eq!(text.matches("rank=same").count(), skeleton.layers().len());
    // x1 -> x2 lies inside a component, x2 -> x3 does not
    assert!(text.contains("v0 -> v1 [label=\"-1\"];"));
    assert!(text.contains("v1 -> v2 [label=\"2*x2\", style=dashed];"));
}

#[test]
fn csv_round_trips_doubles() {
    let sys = fixture_system("motivating.ode");
    let t = simulate(&PolyField::of_system(&sys), &[0.1, 1.0 / 3.0], 0.3, 0.1).unwrap();
    let mut buf = Vec::new();
    traj::write_csv(&mut buf, sys.vars().names(), &t).unwrap();
    let (header, rows) = traj::read_csv(buf.as_slice()).unwrap();
    assert_eq!(header, ["t", "x", "y"]);
    assert_eq!(rows.len(), t.len());
    for ((row, &time), state) in rows.iter().zip(t.times()).zip(t.states()) {
        assert_eq!(row[0], time);
        assert_eq!(&row[1..], state.as_slice());
    }
}
