use super::{Constraints, PowerLimit, DEFAULT_P_MAX};
use crate::ber::{ber_nakagami, objective_nakagami, BerKind, BerPair, Scenario};
use crate::channel::Decision;
use crate::error::{check_probability, invalid, Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_895;

/// Constant powers chosen with statistical channel knowledge only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticalSolution {
    /// Minimizer of the exact weighted objective.
    pub powers: [f64; 2],
    pub objective: f64,
    pub ber: BerPair,
    /// Minimizer of the objective with the LP upper bound, and its value.
    pub upper_powers: [f64; 2],
    pub upper_objective: f64,
}

/// Pareto frontier of the feasible `(P₀, P₁)` region: the largest `P₁`
/// allowed for each `P₀`.
#[derive(Debug, Clone, Copy)]
struct Frontier {
    /// `(a, b, c)` for each limit `a·P₀ + b·P₁ ≤ c`.
    lines: [(f64, f64, f64); 3],
    p0_max: f64,
}

impl Frontier {
    fn new(sc: &Scenario, cons: &Constraints) -> Result<Self> {
        let omega_g = sc.env.g_spec.omega;
        let p_d = sc.sensing.p_detect();
        let joint = sc.sensing.joint();
        let cap = DEFAULT_P_MAX;
        let mut lines =
            [((1.0 - p_d) * omega_g, p_d * omega_g, cons.q_avg), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)];
        match cons.limit {
            PowerLimit::Peak(p) => {
                lines[1] = (1.0, 0.0, p);
                lines[2] = (0.0, 1.0, p);
            }
            PowerLimit::Average(p) => {
                lines[1] = (joint.decision_prob(Decision::Idle), joint.decision_prob(Decision::Busy), p);
                lines[2] = (0.0, 0.0, 0.0);
            }
        }
        let p0_max = lines.iter().filter(|l| l.0 > 0.0).map(|l| l.2 / l.0).fold(cap, f64::min);
        if p0_max.is_nan() || p0_max < 0.0 {
            return Err(Error::Infeasible);
        }
        Ok(Self { lines, p0_max })
    }

    fn p1(&self, p0: f64) -> f64 {
        self.lines
            .iter()
            .filter(|l| l.1 > 0.0)
            .map(|l| ((l.2 - l.0 * p0) / l.1).max(0.0))
            .fold(DEFAULT_P_MAX, f64::min)
    }

    /// Ends of the segments on which a single limit bounds `P₁`.
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.p0_max];
        let ls: Vec<_> = self.lines.iter().filter(|l| l.1 > 0.0).collect();
        for (i, a) in ls.iter().enumerate() {
            for b in &ls[i + 1..] {
                // where the two bounds on P₁ meet
                let den = a.0 / a.1 - b.0 / b.1;
                if den != 0.0 {
                    let p0 = (a.2 / a.1 - b.2 / b.1) / den;
                    if p0 > 0.0 && p0 < self.p0_max {
                        pts.push(p0);
                    }
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Exhaustive search of the Nakagami-averaged weighted objective along the
/// boundary of the feasible region, with `grid` points per boundary segment
/// followed by golden-section refinement around the best grid point.
///
/// Both error rates fall with either power, so the optimum lies on the
/// frontier where no power can grow without breaking a limit. Fading
/// parameters come from `sc.env`.
pub fn optimize_statistical(
    sc: &Scenario,
    lambda: f64,
    cons: &Constraints,
    grid: usize,
) -> Result<StatisticalSolution> {
    check_probability("lambda", lambda)?;
    if grid < 2 {
        return Err(invalid("grid", "need at least two points per segment"));
    }
    let frontier = Frontier::new(sc, cons)?;
    let (powers, objective) = search(sc, lambda, &frontier, grid, false)?;
    let (upper_powers, upper_objective) = search(sc, lambda, &frontier, grid, true)?;
    let fading = &sc.env.h_spec;
    Ok(StatisticalSolution {
        powers,
        objective,
        ber: BerPair {
            hp: ber_nakagami(sc, BerKind::Hp, powers, fading)?,
            lp: ber_nakagami(sc, BerKind::Lp, powers, fading)?,
        },
        upper_powers,
        upper_objective,
    })
}

fn search(
    sc: &Scenario,
    lambda: f64,
    frontier: &Frontier,
    grid: usize,
    upper: bool,
) -> Result<([f64; 2], f64)> {
    let f = |p0: f64| objective_nakagami(sc, lambda, [p0, frontier.p1(p0)], &sc.env.h_spec, upper);
    let bps = frontier.breakpoints();
    let mut xs = Vec::new();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        xs.extend((0..grid).map(|k| a + (b - a) * k as f64 / (grid - 1) as f64));
    }
    if xs.is_empty() {
        xs.push(0.0);
    }
    let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let best = (0..xs.len()).min_by(|&i, &j| values[i].total_cmp(&values[j])).expect("nonempty grid");

    let mut lo = xs[best.saturating_sub(1)];
    let mut hi = xs[(best + 1).min(xs.len() - 1)];
    let (mut x_best, mut f_best) = (xs[best], values[best]);
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..100 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < f_best {
            x_best = x;
            f_best = v;
        }
    }
    Ok(([x_best, frontier.p1(x_best)], f_best))
}
