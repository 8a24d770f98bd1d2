use szego_core::heisenberg::{group_mul, hnorm};
use szego_core::lattice::{lattice, LatticeSpec};
use szego_core::projection::{ConvolutionPlan, SampledFunction};
use szego_core::{GroupPoint, KernelConfig, Quaternion};

fn setup() -> (LatticeSpec, KernelConfig, GroupPoint, Vec<GroupPoint>) {
    let spec = LatticeSpec::new(1.0, 0.5, 0.2).unwrap();
    let cfg = KernelConfig::reproducing(2).unwrap();
    let g = GroupPoint::from_coords(&[0.5, -0.25, 0.0, 0.0, 0.5, 0.0, 0.5]).unwrap();
    let pts = lattice(&spec, 2).unwrap().iter().map(|v| group_mul(&g, &v.point).unwrap()).collect();
    (spec, cfg, g, pts)
}

#[test]
fn projection_is_real_linear_to_roundoff() {
    let (spec, cfg, g, pts) = setup();
    let f1 = SampledFunction::tabulate(2, spec.hy, spec.ht, &pts, |h| {
        Quaternion::new(1.0, h.t.to_array()[0], 0.0, -hnorm(h))
    })
    .unwrap();
    let f2 = SampledFunction::tabulate(2, spec.hy, spec.ht, &pts, |h| {
        Quaternion::new(h.y.to_reals()[1], 0.0, 2.0, 0.5)
    })
    .unwrap();
    let (a, b) = (0.75, -3.0);
    let plan = ConvolutionPlan::new(&spec, &cfg).unwrap();
    let lhs = plan.apply(&f1.combine(a, &f2, b).unwrap(), &g).unwrap();
    let rhs = plan.apply(&f1, &g).unwrap().scale(&a) + plan.apply(&f2, &g).unwrap().scale(&b);
    assert!((lhs - rhs).modulus() <= 1e-12 * rhs.modulus(), "{lhs} vs {rhs}");
}

#[test]
fn left_quaternion_factor_commutes_with_the_sum() {
    // f(h) K(h^{-1} g) is right-linear in K, so a constant left factor q
    // multiplies the result from the left, while a right factor does not
    let (spec, cfg, g, pts) = setup();
    let base = |h: &GroupPoint| Quaternion::new((-hnorm(h)).exp(), 0.0, 0.0, 0.0);
    let q = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    let f = SampledFunction::tabulate(2, spec.hy, spec.ht, &pts, base).unwrap();
    let qf = SampledFunction::tabulate(2, spec.hy, spec.ht, &pts, |h| q * base(h)).unwrap();
    let plan = ConvolutionPlan::new(&spec, &cfg).unwrap();
    let pf = plan.apply(&f, &g).unwrap();
    let pqf = plan.apply(&qf, &g).unwrap();
    assert!((pqf - q * pf).modulus() <= 1e-13 * pf.modulus());
    assert!((pqf - pf * q).modulus() > 1e-3 * pf.modulus());
}
