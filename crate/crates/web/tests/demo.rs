use dbsoliton_web::{FragmentationDemo, MeanFieldDemo};

#[test]
fn mean_field_demo_imprints_and_moves() {
    let mut demo = MeanFieldDemo::new(300.0, 5.0, 0.5, 2.5, false).unwrap();
    assert!((demo.mu() - 6.42).abs() < 0.07);
    let start = demo.dark_minimum();
    demo.advance(1.0).unwrap();
    assert!((demo.time() - 1.0).abs() < 1e-9);
    // the grey soliton moves towards positive x from x0 = -2.5
    assert!(demo.dark_minimum() > start);
    assert!(demo.energy_drift() < 1e-6);
    assert_eq!(demo.x().len(), demo.dark_density().len());
}

#[test]
fn fragmentation_demo_builds_up_second_weight() {
    let mut demo = FragmentationDemo::new(4, 1, 0.5, 4, 1.0).unwrap();
    let w0 = demo.schmidt_weights();
    assert!((w0[0] - 1.0).abs() < 1e-10);
    demo.advance(2.0).unwrap();
    let w = demo.schmidt_weights();
    assert!(w[1] > 1e-4, "{w:?}");
    let occ: f64 = demo.dark_occupations().iter().sum();
    assert!((occ - 4.0).abs() < 1e-9);
    assert!(FragmentationDemo::new(40, 1, 0.5, 4, 1.0).is_err());
}
