//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.

use std::f64::consts::FRAC_PI_4;
use std::panic::{catch_unwind, AssertUnwindSafe};

use cargeom::car::{
    car_fields, car_split, execute_maneuver, integral_curve_x4, plan_parallel_park, CarConfig, CarParams,
};
use cargeom::distribution::VectorField;
use cargeom::distribution::{flow, is_engel};
use cargeom::jet::Chart;
use cargeom::lie_sphere::{
    circle_to_quadric, incident, minkowski_interval, polar_form, quadratic_form, solution_to_cycle, Orientation,
    OrientedCircle,
};
use cargeom::linalg::RANK_REL_TOL;
use cargeom::ode::{
    chart_car_to_jet, chern_invariant, contact_coframe, contact_projective_connection, fit_cycle, normalization_matrix,
    normalize_car_coframe, solve_ode, wunschmann, JetPoint, ThirdOrderOde,
};
use cargeom::sample::{rng, Bounds, CAR_BOX, JET_BOX};
use cargeom::sp2r::{
    self, commutator, is_parabolic, jacobi_violations, killing_matrix, killing_orthogonal,
    killing_quadratic_coefficients, named_subalgebra, nilpotency_degree, verify_gradation, Nilpotency, Q,
};
use cargeom::symmetry::{extract_structure_constants, generators, verify_all_symmetries};
use cargeom::twistor::{
    induced_quadric_action, stabilizer_dimension, standard_flag, wedge_square_identity_exact, Flag, SymplecticMatrix,
};
use nalgebra::{Matrix4, Matrix5};
use rand::Rng;

mod common;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

const IN_BRANCH: Bounds<4> = Bounds::new([-1.0, -1.0, -1.2, -1.2], [1.0, 1.0, 1.2, 1.2]);

fn growth_vector() -> Outcome {
    let d = car_split(&CarParams::default());
    let pts = CAR_BOX.sample_n(&mut rng(1001), 100);
    let rep = is_engel(&d, &pts, RANK_REL_TOL);
    ensure(rep.engel, format!("{} of 100 samples fail", rep.failures()))?;
    Ok("(2,3,4) at 100 configurations".into())
}

fn frame_volume() -> Outcome {
    let mut worst = 0.0f64;
    for ell in [0.5, 1.0, 2.0] {
        let fields = car_fields(&CarParams::new(ell).unwrap());
        for p in CAR_BOX.sample_n(&mut rng(1002), 100) {
            let cols: Vec<[f64; 4]> = fields.iter().map(|f| f.eval(&p).unwrap()).collect();
            let det = Matrix4::from_fn(|i, j| cols[j][i]).determinant();
            worst = worst.max((det - ell * ell).abs() / (ell * ell));
        }
    }
    ensure(worst <= 1e-10, format!("relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn symmetries() -> Outcome {
    let params = CarParams::default();
    let g = generators(&params);
    let pts = CAR_BOX.sample_n(&mut rng(1003), 200);
    let rep = verify_all_symmetries(&g, &pts, 1e-9);
    ensure(rep.all_pass(), format!("max residual {:e}", rep.max_residual()))?;
    let bump = VectorField::parse(&Chart::car(), ["0", "0", "0", "0.01*x"]).unwrap();
    let bad = g.with_replaced(4, g.get(4).plus(&bump));
    let neg = verify_all_symmetries(&bad, &pts, 1e-9);
    ensure(!neg.all_pass(), "perturbed generator passes")?;
    Ok(format!(
        "10 generators, max residual {:.1e}; perturbed residual {:.1e}",
        rep.max_residual(),
        neg.max_residual()
    ))
}

fn symmetry_algebra() -> Outcome {
    let g = generators(&CarParams::default());
    let mut r = rng(1004);
    let fit = CAR_BOX.sample_n(&mut r, 20);
    let held = CAR_BOX.sample_n(&mut r, 20);
    let c = extract_structure_constants(&g, &fit, &held, 1e-8).map_err(|e| e.to_string())?;
    ensure(c.residual <= 1e-8, format!("held-out residual {:e}", c.residual))?;
    let k = c.killing_form();
    ensure(k.signature == (6, 4, 0), format!("signature {:?}", k.signature))?;
    ensure(
        c.derived_dimension() == 10,
        format!("derived dimension {}", c.derived_dimension()),
    )?;
    let table = sp2r::killing_signature();
    ensure(table == k.signature, format!("table signature {table:?}"))?;
    Ok(format!(
        "held-out residual {:.1e}, signature (6,4,0), perfect",
        c.residual
    ))
}

fn sp2r_table() -> Outcome {
    let mut mismatches = 0;
    for i in 1..=sp2r::DIM {
        for j in 1..=sp2r::DIM {
            if commutator(i, j) != common::listed(i, j) {
                mismatches += 1;
            }
        }
    }
    ensure(mismatches == 0, format!("{mismatches} brackets differ"))?;
    ensure(jacobi_violations().is_empty(), "Jacobi identity fails")?;
    let grad = verify_gradation();
    ensure(
        grad.violations.is_empty(),
        format!("gradation violations {:?}", grad.violations),
    )?;
    Ok(format!(
        "{} listed brackets exact, Jacobi and gradation exact",
        common::LISTED.len()
    ))
}

fn killing_pattern() -> Outcome {
    let k = killing_matrix();
    let pairs = [(1, 10), (2, 9), (3, 8), (4, 7), (5, 5), (6, 6)];
    for i in 1..=10 {
        for j in 1..=10 {
            let expected = pairs.contains(&(i.min(j), i.max(j)));
            ensure(
                (k[i - 1][j - 1] != 0) == expected,
                format!("K[{i}][{j}] = {}", k[i - 1][j - 1]),
            )?;
        }
    }
    let signs: Vec<i64> = pairs.iter().map(|&(i, j)| k[i - 1][j - 1].signum()).collect();
    ensure(signs == [-1, 1, 1, -1, 1, 1], format!("signs {signs:?}"))?;
    let quad = killing_quadratic_coefficients();
    let coeff = |p: (usize, usize)| quad.iter().find(|(q, _)| *q == p).map(|(_, v)| *v).unwrap_or(0);
    let unit = coeff((3, 8)).abs();
    let ratios: Vec<f64> = pairs.iter().map(|&p| coeff(p).abs() as f64 / unit as f64).collect();
    ensure(ratios == [4.0, 2.0, 1.0, 2.0, 1.0, 1.0], format!("ratios {ratios:?}"))?;
    let sig = sp2r::killing_signature();
    ensure(sig == (6, 4, 0), format!("signature {sig:?}"))?;
    Ok("support, signs, ratios 4:2:1:2:1:1, signature (6,4,0)".into())
}

fn parabolics() -> Outcome {
    let s = |n| named_subalgebra(n).unwrap();
    for (p, n) in [("p1", "n1"), ("p2", "n2"), ("p12", "n12")] {
        ensure(killing_orthogonal(&s(p)) == s(n), format!("{p} orthogonal is not {n}"))?;
        ensure(is_parabolic(&s(p)) == Ok(true), format!("{p} is not parabolic"))?;
    }
    for (name, dim) in [("n1", 3), ("n2", 3), ("n12", 4), ("m", 4), ("q", 3), ("p", 3)] {
        ensure(s(name).dim() == dim, format!("dim {name} = {}", s(name).dim()))?;
        let nil = nilpotency_degree(&s(name)).map_err(|e| e.to_string())?;
        ensure(nil.is_nilpotent(), format!("{name} not nilpotent"))?;
    }
    ensure(
        nilpotency_degree(&s("m")) == Ok(Nilpotency::Steps(3)),
        "m is not 3-step",
    )?;
    Ok("orthogonals, nilpotency and dimensions as expected".into())
}

fn ode_invariants() -> Outcome {
    let car = ThirdOrderOde::car();
    let (mut w, mut c) = (0.0f64, 0.0f64);
    for p in JET_BOX.sample_n(&mut rng(1008), 100) {
        let pt = JetPoint::from_array(p);
        w = w.max(wunschmann(&car, &pt).map_err(|e| e.to_string())?.abs());
        c = c.max(chern_invariant(&car, &pt).map_err(|e| e.to_string())?.abs());
    }
    ensure(w <= 1e-10 && c <= 1e-10, format!("max|W| {w:e}, max|C| {c:e}"))?;
    let pt = JetPoint::new(0.3, -0.7, 1.1, 0.4);
    let wy = wunschmann(&ThirdOrderOde::parse("y").unwrap(), &pt).unwrap();
    ensure((wy - 54.0).abs() <= 1e-10, format!("W[y] = {wy}"))?;
    let c4 = chern_invariant(&ThirdOrderOde::parse("q^4").unwrap(), &pt).unwrap();
    ensure((c4 - 24.0).abs() <= 4.0 * f64::EPSILON * 24.0, format!("C[q^4] = {c4}"))?;
    Ok(format!("max|W| {w:.1e}, max|C| {c:.1e}, W[y] = {wy}, C[q^4] = {c4}"))
}

fn coframe_pipeline() -> Outcome {
    let car = ThirdOrderOde::car();
    let params = CarParams::default();
    let mut worst = 0.0f64;
    for a in IN_BRANCH.sample_n(&mut rng(1009), 100) {
        let q = CarConfig::from_array(a);
        let got = normalize_car_coframe(&q, &params).map_err(|e| e.to_string())?;
        let want = contact_coframe(&car, &chart_car_to_jet(&q, &params).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((got[i][j] - want[i][j]).abs());
            }
        }
    }
    ensure(worst <= 1e-10, format!("componentwise error {worst:e}"))?;
    let a0 = normalization_matrix(&CarConfig::default(), &CarParams::new(2.0).unwrap());
    ensure(a0[(0, 0)] == 2.0, "A1 at the origin is not diag(l,1,1,1)")?;
    Ok(format!("max componentwise error {worst:.1e}"))
}

fn circle_solutions() -> Outcome {
    let car = ThirdOrderOde::car();
    let mut r = rng(1010);
    let (mut res, mut qmax) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let init = JetPoint::new(
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-0.5..0.5),
            sign * r.random_range(0.2..1.0),
        );
        let sol = solve_ode(&car, &init, 0.3, 300).map_err(|e| e.to_string())?;
        let pts: Vec<[f64; 2]> = sol.iter().step_by(10).map(|s| [s.x, s.y]).collect();
        let fit = fit_cycle(&pts);
        res = res.max(fit.residual);
        let qp =
            solution_to_cycle(fit.xi, fit.eta, fit.mu, fit.nu, Orientation::Positive).map_err(|e| e.to_string())?;
        qmax = qmax.max(quadratic_form(&qp.normalized().unwrap()).abs());
    }
    ensure(res <= 1e-6, format!("fit residual {res:e}"))?;
    ensure(qmax <= 1e-8, format!("|Q| {qmax:e}"))?;
    Ok(format!("fit residual {res:.1e}, |Q| {qmax:.1e}"))
}

fn contact_projective() -> Outcome {
    let car = ThirdOrderOde::car();
    let samples = JET_BOX.sample_n(&mut rng(1011), 100);
    let bases: Vec<[f64; 3]> = samples.iter().map(|p| [p[0], p[1], p[2]]).collect();
    let conn = contact_projective_connection(&car, &bases).map_err(|e| e.to_string())?;
    let mut repro = 0.0f64;
    for p in &samples {
        let g = conn.coeffs([p[0], p[1], p[2]]).unwrap();
        repro = repro.max((g.reconstruct(p[3]) - car.eval(&JetPoint::from_array(*p)).unwrap()).abs());
    }
    ensure(repro <= 1e-12, format!("reconstruction error {repro:e}"))?;
    let mut r = rng(1012);
    let mut geo = 0.0f64;
    for _ in 0..5 {
        let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let init = JetPoint::new(
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-0.5..0.5),
            sign * r.random_range(0.05..0.4),
        );
        let path = conn
            .geodesic([init.x, init.y, init.p], [1.0, init.q], 3.0, 3000)
            .map_err(|e| e.to_string())?;
        let reach = path.iter().map(|s| s[0] - init.x).fold(0.0, f64::max);
        ensure(reach >= 1.0, format!("geodesic covers x-span {reach}"))?;
        for s in path.iter().step_by(100).take_while(|s| s[0] - init.x <= 1.0) {
            let sol = *solve_ode(&car, &init, s[0] - init.x, 400).unwrap().last().unwrap();
            geo = geo.max((sol.y - s[1]).abs()).max((sol.p - s[2]).abs());
        }
    }
    ensure(geo <= 1e-6, format!("geodesic deviation {geo:e}"))?;
    Ok(format!("reconstruction {repro:.1e}, geodesic deviation {geo:.1e}"))
}

fn lie_sphere() -> Outcome {
    let mut r = rng(1013);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut c = || {
            OrientedCircle::new(
                r.random_range(-3.0..3.0),
                r.random_range(-3.0..3.0),
                r.random_range(-2.0..2.0),
            )
        };
        let (c1, c2) = (c(), c());
        let b = polar_form(&circle_to_quadric(&c1), &circle_to_quadric(&c2));
        worst = worst.max((2.0 * b + minkowski_interval(&c1, &c2)).abs());
    }
    ensure(worst <= 1e-12, format!("2B + interval {worst:e}"))?;
    let q = |a, b, rr| circle_to_quadric(&OrientedCircle::new(a, b, rr));
    let unit = q(0.0, 0.0, 1.0);
    let cases = [
        incident(&unit, &q(2.0, 0.0, -1.0), 1e-12).unwrap(),
        incident(&unit, &q(2.0, 0.0, 1.0), 1e-12).unwrap(),
        incident(&unit, &q(1.0, 0.0, 0.0), 1e-12).unwrap(),
    ];
    ensure(cases == [true, false, true], format!("tangency cases {cases:?}"))?;
    Ok(format!(
        "max |2B + interval| {worst:.1e}; cases (incident, not incident, incident)"
    ))
}

fn twistor() -> Outcome {
    let mut r = rng(1014);
    for _ in 0..200 {
        let v: [Q; 5] = std::array::from_fn(|_| Q::new(r.random_range(-60..60), r.random_range(1..25)));
        ensure(wedge_square_identity_exact(v), format!("wedge square fails at {v:?}"))?;
    }
    let neg = SymplecticMatrix::new(-Matrix4::identity()).unwrap();
    ensure(
        induced_quadric_action(&neg) == Matrix5::identity(),
        "-I does not act trivially",
    )?;
    let mut hom = 0.0f64;
    for _ in 0..50 {
        let a = SymplecticMatrix::random(&mut r, 0.5);
        let b = SymplecticMatrix::random(&mut r, 0.5);
        let ab = SymplecticMatrix::new(a.matrix() * b.matrix()).map_err(|e| e.to_string())?;
        let d = induced_quadric_action(&ab) - induced_quadric_action(&a) * induced_quadric_action(&b);
        hom = hom.max(d.amax());
    }
    ensure(hom <= 1e-10, format!("homomorphism defect {hom:e}"))?;
    let (line, plane) = standard_flag();
    let dims = [
        stabilizer_dimension(&Flag::Plane(plane)).map_err(|e| e.to_string())?,
        stabilizer_dimension(&Flag::Line(line)).map_err(|e| e.to_string())?,
        stabilizer_dimension(&Flag::Pair { line, plane }).map_err(|e| e.to_string())?,
    ];
    ensure(dims == [7, 7, 6], format!("stabilizer dimensions {dims:?}"))?;
    Ok(format!(
        "exact wedge square, homomorphism defect {hom:.1e}, stabilizers (7,7,6)"
    ))
}

fn parking() -> Outcome {
    let params = CarParams::default();
    let q0 = CarConfig::default();
    let plan = plan_parallel_park(&q0, 0.5, &params, FRAC_PI_4, None).map_err(|e| e.to_string())?;
    let traj = execute_maneuver(&q0, &plan.maneuver, &params, 2000).map_err(|e| e.to_string())?;
    let miss = traj.last().distance(&plan.predicted);
    ensure(miss <= 1e-6, format!("endpoint error {miss:e}"))?;
    let [rear, front] = traj.max_constraint_residual(&params);
    ensure(
        rear <= 1e-8 && front <= 1e-8,
        format!("constraint residuals {rear:e}, {front:e}"),
    )?;
    let [_, _, _, x4] = car_fields(&params);
    let start = CarConfig::new(0.0, 0.0, 0.0, FRAC_PI_4);
    let exact = integral_curve_x4(&start, 4.0, &params);
    let err = |n| CarConfig::from_array(*flow(&x4, start.to_array(), 4.0, n).unwrap().last().unwrap()).distance(&exact);
    let ratio = err(20) / err(40);
    ensure((14.0..18.0).contains(&ratio), format!("RK4 halving ratio {ratio}"))?;
    Ok(format!(
        "endpoint error {miss:.1e}, residuals {rear:.1e}/{front:.1e}, RK4 ratio {ratio:.2}"
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("growth vector", growth_vector),
        ("frame volume", frame_volume),
        ("split symmetries", symmetries),
        ("symmetry algebra", symmetry_algebra),
        ("sp(2,R) table", sp2r_table),
        ("Killing pattern", killing_pattern),
        ("parabolics", parabolics),
        ("ODE invariants", ode_invariants),
        ("coframe pipeline", coframe_pipeline),
        ("circle solutions", circle_solutions),
        ("contact projective", contact_projective),
        ("Lie sphere", lie_sphere),
        ("twistor", twistor),
        ("parking", parking),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
