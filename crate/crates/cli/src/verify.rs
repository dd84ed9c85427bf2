use cargeom::car::{car_fields, car_split, CarConfig, CarParams};
use cargeom::distribution::{is_engel, SplitDistribution, VectorField};
use cargeom::jet::Chart;
use cargeom::lie_sphere::{
    circle_to_quadric, incident, minkowski_interval, polar_form, quadratic_form, solution_to_cycle, Orientation,
    OrientedCircle,
};
use cargeom::ode::{
    chart_car_to_jet, chern_invariant, contact_coframe, contact_projective_connection, fit_cycle,
    normalize_car_coframe, ode_fields, solve_ode, wunschmann, JetPoint, ThirdOrderOde,
};
use cargeom::sample::{Bounds, SampleRng, CAR_BOX, JET_BOX};
use cargeom::sp2r::{self, Q};
use cargeom::symmetry::{extract_structure_constants, generators, verify_all_symmetries, MIN_FIT_SAMPLES};
use cargeom::twistor::{
    induced_quadric_action, omega_antisymmetrization_identity, quadric_preservation_residual, stabilizer_dimension,
    standard_flag, wedge_square_identity_exact, Flag, SymplecticMatrix,
};
use clap::ValueEnum;
use nalgebra::{Matrix4, Matrix5};
use rand::Rng;

use crate::report::{Check, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Engel,
    Symmetries,
    Algebra,
    Sp2r,
    Quadric,
    Twistor,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Engel => "engel",
            Suite::Symmetries => "symmetries",
            Suite::Algebra => "algebra",
            Suite::Sp2r => "sp2r",
            Suite::Quadric => "quadric",
            Suite::Twistor => "twistor",
            Suite::All => "all",
        }
    }
}

const SINGLE: [Suite; 6] = [
    Suite::Engel,
    Suite::Symmetries,
    Suite::Algebra,
    Suite::Sp2r,
    Suite::Quadric,
    Suite::Twistor,
];

pub struct Context {
    pub rng: SampleRng,
    pub samples: usize,
    pub tol: Tolerances,
    /// Replace `S4` by a perturbed field (exercises the failure path).
    pub broken_generator: bool,
}

pub fn run(suite: Suite, ctx: &mut Context) -> Vec<Check> {
    match suite {
        Suite::Engel => engel(ctx),
        Suite::Symmetries => symmetries(ctx),
        Suite::Algebra => algebra(ctx),
        Suite::Sp2r => sp2r_suite(),
        Suite::Quadric => quadric(ctx),
        Suite::Twistor => twistor(ctx),
        Suite::All => SINGLE
            .iter()
            .flat_map(|&s| run(s, ctx).into_iter().map(move |c| c.prefixed(s.name())))
            .collect(),
    }
}

const IN_BRANCH: Bounds<4> = Bounds::new([-1.0, -1.0, -1.2, -1.2], [1.0, 1.0, 1.2, 1.2]);

fn engel_failures(d: &SplitDistribution, pts: &[[f64; 4]], rank_tol: f64) -> f64 {
    is_engel(d, pts, rank_tol).failures() as f64
}

fn engel(ctx: &mut Context) -> Vec<Check> {
    let rank = ctx.tol.get("rank");
    let configs = CAR_BOX.sample_n(&mut ctx.rng, ctx.samples);
    let jets = JET_BOX.sample_n(&mut ctx.rng, ctx.samples);
    let (x3, x4) = ode_fields(&ThirdOrderOde::car());
    let mut volume = 0.0f64;
    for ell in [0.5, 1.0, 2.0] {
        let fields = car_fields(&CarParams::new(ell).expect("positive length"));
        for p in &configs {
            match fields.iter().map(|f| f.eval(p)).collect::<Result<Vec<_>, _>>() {
                Ok(cols) => {
                    let det = Matrix4::from_fn(|i, j| cols[j][i]).determinant();
                    volume = volume.max((det - ell * ell).abs() / (ell * ell));
                }
                Err(_) => volume = f64::INFINITY,
            }
        }
    }
    vec![
        Check::within(
            "car_growth_vector",
            engel_failures(&car_split(&CarParams::default()), &configs, rank),
            0.0,
        ),
        Check::within(
            "ode_growth_vector",
            engel_failures(&SplitDistribution::new(x3, x4), &jets, rank),
            0.0,
        ),
        Check::within("frame_volume", volume, ctx.tol.get("volume")),
    ]
}

fn perturbed_s4(params: &CarParams) -> VectorField {
    let bump = VectorField::parse(&Chart::car(), ["0", "0", "0", "0.01*x"]).expect("valid field");
    generators(params).get(4).plus(&bump)
}

fn symmetries(ctx: &mut Context) -> Vec<Check> {
    let tol = ctx.tol.get("symmetry");
    let params = CarParams::default();
    let mut gens = generators(&params);
    if ctx.broken_generator {
        gens = gens.with_replaced(4, perturbed_s4(&params));
    }
    let pts = CAR_BOX.sample_n(&mut ctx.rng, ctx.samples);
    let report = verify_all_symmetries(&gens, &pts, tol);
    let mut checks: Vec<Check> = report
        .checks
        .iter()
        .enumerate()
        .map(|(i, c)| Check::from_result(&format!("S{:02}", i + 1), tol, c.as_ref().map(|c| c.max_residual)))
        .collect();
    let control = generators(&params).with_replaced(4, perturbed_s4(&params));
    let neg = verify_all_symmetries(&control, &pts, tol);
    let bad = neg.checks[3].as_ref().map(|c| c.max_residual).unwrap_or(f64::INFINITY);
    checks.push(Check::exceeds("negative_control", bad, tol));
    checks
}

fn algebra(ctx: &mut Context) -> Vec<Check> {
    let tol = ctx.tol.get("closure");
    let gens = generators(&CarParams::default());
    let fit = CAR_BOX.sample_n(&mut ctx.rng, ctx.samples.max(MIN_FIT_SAMPLES));
    let held = CAR_BOX.sample_n(&mut ctx.rng, (ctx.samples / 2).max(10));
    let c = match extract_structure_constants(&gens, &fit, &held, tol) {
        Ok(c) => c,
        Err(_) => return vec![Check::error("closure", tol)],
    };
    let k = c.killing_form();
    vec![
        Check::within("closure", c.residual, tol),
        Check::within("jacobi", c.jacobi_residual(), tol),
        Check::holds("killing_signature", k.signature == (6, 4, 0)),
        Check::holds("perfect", c.is_perfect()),
        Check::holds("matches_sp2r_signature", k.signature == sp2r::killing_signature()),
    ]
}

fn sp2r_suite() -> Vec<Check> {
    let k = sp2r::killing_matrix();
    let pairs = [(1, 10), (2, 9), (3, 8), (4, 7), (5, 5), (6, 6)];
    let support_ok = (1..=sp2r::DIM)
        .all(|i| (1..=sp2r::DIM).all(|j| (k[i - 1][j - 1] != 0) == pairs.contains(&(i.min(j), i.max(j)))));
    let s = |n| sp2r::named_subalgebra(n).expect("known name");
    let mut checks = vec![
        Check::within("jacobi", sp2r::jacobi_violations().len() as f64, 0.0),
        Check::within("gradation", sp2r::verify_gradation().violations.len() as f64, 0.0),
        Check::holds("killing_signature", sp2r::killing_signature() == (6, 4, 0)),
        Check::holds("killing_support", support_ok),
        Check::holds(
            "m_three_step",
            sp2r::nilpotency_degree(&s("m")) == Ok(sp2r::Nilpotency::Steps(3)),
        ),
    ];
    for (p, n) in [("p1", "n1"), ("p2", "n2"), ("p12", "n12")] {
        checks.push(Check::holds(
            format!("orthogonal_{p}"),
            sp2r::killing_orthogonal(&s(p)) == s(n),
        ));
        checks.push(Check::holds(
            format!("parabolic_{p}"),
            sp2r::is_parabolic(&s(p)) == Ok(true),
        ));
    }
    for n in ["n1", "n2", "n12", "m", "q", "p"] {
        let nil = sp2r::nilpotency_degree(&s(n)).is_ok_and(|d| d.is_nilpotent());
        checks.push(Check::holds(format!("nilpotent_{n}"), nil));
    }
    checks
}

fn random_circle(rng: &mut SampleRng) -> OrientedCircle {
    OrientedCircle::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-2.0..2.0),
    )
}

fn random_initial(rng: &mut SampleRng, qmin: f64, qmax: f64) -> JetPoint {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    JetPoint::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-0.5..0.5),
        sign * rng.random_range(qmin..qmax),
    )
}

fn max_or_inf<E>(acc: f64, r: Result<f64, E>) -> f64 {
    r.map_or(f64::INFINITY, |v| acc.max(v.abs()))
}

fn quadric(ctx: &mut Context) -> Vec<Check> {
    let rng = &mut ctx.rng;
    let mut checks = Vec::new();

    let mut identity = 0.0f64;
    for _ in 0..10 * ctx.samples {
        let (c1, c2) = (random_circle(rng), random_circle(rng));
        let b = polar_form(&circle_to_quadric(&c1), &circle_to_quadric(&c2));
        identity = identity.max((2.0 * b + minkowski_interval(&c1, &c2)).abs());
    }
    checks.push(Check::within("incidence_identity", identity, ctx.tol.get("incidence")));
    let q = |a, b, r| circle_to_quadric(&OrientedCircle::new(a, b, r));
    let unit = q(0.0, 0.0, 1.0);
    let itol = ctx.tol.get("incidence");
    let cases = [
        incident(&unit, &q(2.0, 0.0, -1.0), itol),
        incident(&unit, &q(2.0, 0.0, 1.0), itol),
        incident(&unit, &q(1.0, 0.0, 0.0), itol),
    ];
    checks.push(Check::holds("tangency_cases", cases == [Ok(true), Ok(false), Ok(true)]));

    let car = ThirdOrderOde::car();
    let (mut w, mut c) = (0.0f64, 0.0f64);
    for p in JET_BOX.sample_n(rng, ctx.samples) {
        let pt = JetPoint::from_array(p);
        w = max_or_inf(w, wunschmann(&car, &pt));
        c = max_or_inf(c, chern_invariant(&car, &pt));
    }
    checks.push(Check::within("wunschmann", w, ctx.tol.get("invariant")));
    checks.push(Check::within("chern", c, ctx.tol.get("invariant")));

    let params = CarParams::default();
    let mut coframe = 0.0f64;
    for a in IN_BRANCH.sample_n(rng, ctx.samples) {
        let cfg = CarConfig::from_array(a);
        let got = normalize_car_coframe(&cfg, &params);
        let want = chart_car_to_jet(&cfg, &params).map(|j| contact_coframe(&car, &j));
        match (got, want) {
            (Ok(g), Ok(Ok(w))) => {
                for i in 0..4 {
                    for j in 0..4 {
                        coframe = coframe.max((g[i][j] - w[i][j]).abs());
                    }
                }
            }
            _ => coframe = f64::INFINITY,
        }
    }
    checks.push(Check::within("coframe_pipeline", coframe, ctx.tol.get("coframe")));

    let (mut fit_res, mut on_quadric) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let init = random_initial(rng, 0.2, 1.0);
        let Ok(sol) = solve_ode(&car, &init, 0.3, 300) else {
            fit_res = f64::INFINITY;
            continue;
        };
        let pts: Vec<[f64; 2]> = sol.iter().step_by(10).map(|s| [s.x, s.y]).collect();
        let fit = fit_cycle(&pts);
        fit_res = fit_res.max(fit.residual);
        on_quadric = max_or_inf(
            on_quadric,
            solution_to_cycle(fit.xi, fit.eta, fit.mu, fit.nu, Orientation::Positive)
                .and_then(|qp| qp.normalized())
                .map(|v| quadratic_form(&v)),
        );
    }
    checks.push(Check::within("solution_cycle_fit", fit_res, ctx.tol.get("fit")));
    checks.push(Check::within("solution_on_quadric", on_quadric, ctx.tol.get("quadric")));

    let samples = JET_BOX.sample_n(rng, ctx.samples);
    let bases: Vec<[f64; 3]> = samples.iter().map(|p| [p[0], p[1], p[2]]).collect();
    match contact_projective_connection(&car, &bases) {
        Ok(conn) => {
            let mut repro = 0.0f64;
            for p in &samples {
                let r = conn
                    .coeffs([p[0], p[1], p[2]])
                    .and_then(|g| car.eval(&JetPoint::from_array(*p)).map(|f| g.reconstruct(p[3]) - f));
                repro = max_or_inf(repro, r);
            }
            checks.push(Check::within(
                "connection_reconstruction",
                repro,
                ctx.tol.get("reconstruction"),
            ));
            let mut geo = 0.0f64;
            for _ in 0..3 {
                let init = random_initial(rng, 0.05, 0.4);
                geo = geo.max(geodesic_deviation(&conn, &car, &init));
            }
            checks.push(Check::within("geodesic_projection", geo, ctx.tol.get("geodesic")));
        }
        Err(_) => checks.push(Check::error("connection_reconstruction", ctx.tol.get("reconstruction"))),
    }
    checks
}

/// Largest `(y, p)` gap between a geodesic with velocity `(1, q0)` and the
/// solution through the same jet, over an x-span of 1.
fn geodesic_deviation(conn: &cargeom::ode::ProjectiveConnection, f: &ThirdOrderOde, init: &JetPoint) -> f64 {
    let Ok(path) = conn.geodesic([init.x, init.y, init.p], [1.0, init.q], 3.0, 3000) else {
        return f64::INFINITY;
    };
    if path.iter().all(|s| s[0] - init.x < 1.0) {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for s in path.iter().step_by(100).take_while(|s| s[0] - init.x <= 1.0) {
        match solve_ode(f, init, s[0] - init.x, 400) {
            Ok(sol) => {
                let end = sol.last().expect("non-empty solution");
                worst = worst.max((end.y - s[1]).abs()).max((end.p - s[2]).abs());
            }
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn twistor(ctx: &mut Context) -> Vec<Check> {
    let rng = &mut ctx.rng;
    let htol = ctx.tol.get("homomorphism");
    let exact = (0..ctx.samples).all(|_| {
        let v: [Q; 5] = std::array::from_fn(|_| Q::new(rng.random_range(-60..60), rng.random_range(1..25)));
        wedge_square_identity_exact(v)
    });
    let neg = SymplecticMatrix::new(-Matrix4::identity()).expect("-I is symplectic");
    let (mut hom, mut preserve) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let a = SymplecticMatrix::random(rng, 0.5);
        let b = SymplecticMatrix::random(rng, 0.5);
        let (ma, mb) = (induced_quadric_action(&a), induced_quadric_action(&b));
        preserve = preserve.max(quadric_preservation_residual(&ma));
        match SymplecticMatrix::new(a.matrix() * b.matrix()) {
            Ok(ab) => hom = hom.max((induced_quadric_action(&ab) - ma * mb).amax()),
            Err(_) => hom = f64::INFINITY,
        }
    }
    let (line, plane) = standard_flag();
    let dim = |name: &str, f: Flag, expect: usize| {
        Check::from_result(name, 0.0, stabilizer_dimension(&f).map(|d| d.abs_diff(expect) as f64))
    };
    vec![
        Check::holds("wedge_square_exact", exact),
        Check::holds(
            "minus_identity_trivial",
            induced_quadric_action(&neg) == Matrix5::identity(),
        ),
        Check::within("homomorphism", hom, htol),
        Check::within("quadric_preserved", preserve, htol),
        dim("stabilizer_plane", Flag::Plane(plane), 7),
        dim("stabilizer_line", Flag::Line(line), 7),
        dim("stabilizer_pair", Flag::Pair { line, plane }, 6),
        Check::holds("omega_antisymmetrization", omega_antisymmetrization_identity()),
    ]
}
