//! Newton-Raphson AC power flow on polar mismatch equations.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::{BusKind, GridNetwork, NetworkIndex, PowerFlowSolution};
use crate::linalg::solve_dense;

/// Convergence controls. `tol` is the worst-case p.u. mismatch accepted.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 20,
        }
    }
}

/// Builds the bus admittance matrix: series elements, half line charging at
/// each end, and bus shunts.
pub fn build_admittance(network: &GridNetwork) -> Array2<Complex64> {
    let index = network.index();
    let n = network.buses.len();
    let mut y = Array2::<Complex64>::zeros((n, n));
    for branch in &network.branches {
        let f = index.bus_pos[&branch.from_bus];
        let t = index.bus_pos[&branch.to_bus];
        let y_series = Complex64::new(branch.r, branch.x).inv();
        let y_shunt = Complex64::new(0.0, branch.b_charging / 2.0);
        y[(f, f)] += y_series + y_shunt;
        y[(t, t)] += y_series + y_shunt;
        y[(f, t)] -= y_series;
        y[(t, f)] -= y_series;
    }
    for (i, bus) in network.buses.iter().enumerate() {
        y[(i, i)] += Complex64::new(bus.shunt_g, bus.shunt_b);
    }
    y
}

/// How a bus enters the mismatch equations during a solve. PV buses that
/// hit a generator reactive limit are pinned at it and solved as PQ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SolveKind {
    Slack,
    Pv,
    Pq,
    PvAtQmin,
    PvAtQmax,
}

impl SolveKind {
    fn solves_q(self) -> bool {
        matches!(self, SolveKind::Pq | SolveKind::PvAtQmin | SolveKind::PvAtQmax)
    }
}

/// A network with every load-independent solver structure precomputed:
/// admittance rows as edge lists, position lookups, and per-bus generator
/// aggregates. Reuse one of these when solving the same grid repeatedly.
#[derive(Debug, Clone)]
pub struct PreparedNetwork {
    network: GridNetwork,
    index: NetworkIndex,
    /// per row: `(column, g, b)` for every structurally nonzero admittance
    rows: Vec<Vec<(usize, f64, f64)>>,
    /// Σ scheduled active generation per bus
    p_gen: Vec<f64>,
    /// total generator reactive capability per bus
    q_min_total: Vec<f64>,
    q_max_total: Vec<f64>,
    base_kinds: Vec<SolveKind>,
}

impl PreparedNetwork {
    pub fn new(network: GridNetwork) -> PreparedNetwork {
        let index = network.index();
        let n = network.buses.len();
        let y = build_admittance(&network);
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|k| {
                        let v = y[(i, k)];
                        (v.re != 0.0 || v.im != 0.0).then_some((k, v.re, v.im))
                    })
                    .collect()
            })
            .collect();

        let mut p_gen = vec![0.0; n];
        let mut q_min_total = vec![0.0; n];
        let mut q_max_total = vec![0.0; n];
        for gen in &network.generators {
            let i = index.bus_pos[&gen.bus_id];
            p_gen[i] += gen.p_g;
            q_min_total[i] += gen.q_min;
            q_max_total[i] += gen.q_max;
        }
        let base_kinds = network
            .buses
            .iter()
            .map(|bus| match bus.kind {
                BusKind::Slack => SolveKind::Slack,
                BusKind::Pv => SolveKind::Pv,
                BusKind::Pq => SolveKind::Pq,
            })
            .collect();

        PreparedNetwork {
            network,
            index,
            rows,
            p_gen,
            q_min_total,
            q_max_total,
            base_kinds,
        }
    }

    pub fn network(&self) -> &GridNetwork {
        &self.network
    }

    pub fn index(&self) -> &NetworkIndex {
        &self.index
    }

    /// Solves with explicit per-bus loads (overriding the network's own) and
    /// plant setpoints. See [`solve_power_flow`].
    pub fn solve(
        &self,
        p_load: &[f64],
        q_load: &[f64],
        plant_setpoints: &[f64],
        options: SolverOptions,
    ) -> PowerFlowSolution {
        let n = self.network.buses.len();
        assert_eq!(p_load.len(), n, "one active load per bus");
        assert_eq!(q_load.len(), n, "one reactive load per bus");
        assert_eq!(
            plant_setpoints.len(),
            self.network.plants.len(),
            "one setpoint per plant"
        );
        assert!(options.tol > 0.0, "tolerance must be positive");

        let mut v_target: Vec<f64> = self
            .network
            .buses
            .iter()
            .map(|bus| bus.v_set.unwrap_or(1.0))
            .collect();
        for (p, &setpoint) in plant_setpoints.iter().enumerate() {
            for &bus in &self.index.plant_buses[p] {
                v_target[bus] = setpoint;
            }
        }

        let p_spec: Vec<f64> = (0..n).map(|i| self.p_gen[i] - p_load[i]).collect();
        let q_spec_load: Vec<f64> = (0..n).map(|i| -q_load[i]).collect();

        let mut kinds = self.base_kinds.clone();
        // flat start: commanded magnitudes on slack/PV, 1.0 on PQ, zero angles
        let mut vm: Vec<f64> = (0..n)
            .map(|i| match kinds[i] {
                SolveKind::Slack | SolveKind::Pv => v_target[i],
                _ => 1.0,
            })
            .collect();
        let mut va = vec![0.0; n];

        let mut converged = false;
        let mut iterations = 0;
        let mut max_mismatch = f64::INFINITY;

        for iter in 0..=options.max_iter {
            let (p_calc, q_calc) = self.injections(&vm, &va);

            let switched =
                self.apply_q_limits(&q_calc, &q_spec_load, &v_target, &mut kinds, &mut vm);
            // a release resets the bus magnitude, so injections may be stale
            let (p_calc, q_calc) = if switched {
                self.injections(&vm, &va)
            } else {
                (p_calc, q_calc)
            };

            let q_spec: Vec<f64> = (0..n)
                .map(|i| match kinds[i] {
                    SolveKind::PvAtQmin => q_spec_load[i] + self.q_min_total[i],
                    SolveKind::PvAtQmax => q_spec_load[i] + self.q_max_total[i],
                    _ => q_spec_load[i],
                })
                .collect();

            let angle_vars: Vec<usize> =
                (0..n).filter(|&i| kinds[i] != SolveKind::Slack).collect();
            let vmag_vars: Vec<usize> = (0..n).filter(|&i| kinds[i].solves_q()).collect();

            let mut mismatch = Vec::with_capacity(angle_vars.len() + vmag_vars.len());
            for &i in &angle_vars {
                mismatch.push(p_spec[i] - p_calc[i]);
            }
            for &i in &vmag_vars {
                mismatch.push(q_spec[i] - q_calc[i]);
            }

            max_mismatch = mismatch.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            iterations = iter;
            if max_mismatch < options.tol && !switched {
                converged = true;
                break;
            }
            if iter == options.max_iter {
                break;
            }

            let jac = self.jacobian(&vm, &va, &p_calc, &q_calc, &angle_vars, &vmag_vars);
            let Some(dx) = solve_dense(&jac, &Array1::from_vec(mismatch)) else {
                break; // singular Jacobian: report as diverged
            };
            if !dx.iter().all(|v| v.is_finite()) {
                break;
            }

            for (k, &i) in angle_vars.iter().enumerate() {
                va[i] += dx[k];
            }
            for (k, &i) in vmag_vars.iter().enumerate() {
                vm[i] += dx[angle_vars.len() + k];
            }
            if vm.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                break; // voltage collapse in the iterate
            }
        }

        let (p_calc, q_calc) = self.injections(&vm, &va);
        let s_line = branch_apparent_power(&self.network, &self.index, &vm, &va);
        let (p_g, q_g) =
            self.recover_generator_injections(&kinds, &p_calc, &q_calc, p_load, q_load);

        PowerFlowSolution {
            v_m: vm,
            v_a: va,
            s_line,
            p_g,
            q_g,
            converged,
            iterations,
            max_mismatch,
        }
    }

    /// Active/reactive injections at every bus via the real-valued
    /// trigonometric sums over the nonzero admittance entries.
    fn injections(&self, vm: &[f64], va: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = vm.len();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            let mut pi = 0.0;
            let mut qi = 0.0;
            for &(k, g, b) in &self.rows[i] {
                if k == i {
                    pi += vm[i] * g;
                    qi += vm[i] * -b;
                } else {
                    let (sin, cos) = (va[i] - va[k]).sin_cos();
                    pi += vm[k] * (g * cos + b * sin);
                    qi += vm[k] * (g * sin - b * cos);
                }
            }
            p[i] = vm[i] * pi;
            q[i] = vm[i] * qi;
        }
        (p, q)
    }

    /// Re-derives solve kinds from the current iterate. Returns true when
    /// any bus switched; released buses get their magnitude reset to the
    /// commanded value.
    fn apply_q_limits(
        &self,
        q_calc: &[f64],
        q_spec_load: &[f64],
        v_target: &[f64],
        kinds: &mut [SolveKind],
        vm: &mut [f64],
    ) -> bool {
        let mut switched = false;
        for i in 0..kinds.len() {
            match kinds[i] {
                SolveKind::Pv => {
                    // reactive output needed from the machines to hold v_target
                    let q_gen = q_calc[i] - q_spec_load[i];
                    if q_gen > self.q_max_total[i] + 1e-9 {
                        kinds[i] = SolveKind::PvAtQmax;
                        switched = true;
                    } else if q_gen < self.q_min_total[i] - 1e-9 {
                        kinds[i] = SolveKind::PvAtQmin;
                        switched = true;
                    }
                }
                SolveKind::PvAtQmax => {
                    if vm[i] > v_target[i] + 1e-9 {
                        kinds[i] = SolveKind::Pv;
                        vm[i] = v_target[i];
                        switched = true;
                    }
                }
                SolveKind::PvAtQmin => {
                    if vm[i] < v_target[i] - 1e-9 {
                        kinds[i] = SolveKind::Pv;
                        vm[i] = v_target[i];
                        switched = true;
                    }
                }
                _ => {}
            }
        }
        switched
    }

    /// Polar power-flow Jacobian over the active variables, ordered
    /// `[d theta..., d v...]` to match the mismatch vector `[dP..., dQ...]`.
    /// Off-diagonal entries exist only for nonzero admittances, so the fill
    /// loops run over the edge lists.
    fn jacobian(
        &self,
        vm: &[f64],
        va: &[f64],
        p_calc: &[f64],
        q_calc: &[f64],
        angle_vars: &[usize],
        vmag_vars: &[usize],
    ) -> Array2<f64> {
        let n = vm.len();
        let na = angle_vars.len();
        let nv = vmag_vars.len();
        // bus -> variable positions (None when the quantity is fixed)
        let mut angle_pos = vec![usize::MAX; n];
        for (pos, &i) in angle_vars.iter().enumerate() {
            angle_pos[i] = pos;
        }
        let mut vmag_pos = vec![usize::MAX; n];
        for (pos, &i) in vmag_vars.iter().enumerate() {
            vmag_pos[i] = pos;
        }

        let mut jac = Array2::<f64>::zeros((na + nv, na + nv));
        for i in 0..n {
            let row_p = angle_pos[i];
            let row_q = vmag_pos[i];
            if row_p == usize::MAX && row_q == usize::MAX {
                continue;
            }
            for &(k, g, b) in &self.rows[i] {
                if k == i {
                    let dp_dt = -q_calc[i] - b * vm[i] * vm[i];
                    let dp_dv = p_calc[i] / vm[i] + g * vm[i];
                    let dq_dt = p_calc[i] - g * vm[i] * vm[i];
                    let dq_dv = q_calc[i] / vm[i] - b * vm[i];
                    if row_p != usize::MAX {
                        if angle_pos[i] != usize::MAX {
                            jac[(row_p, angle_pos[i])] = dp_dt;
                        }
                        if vmag_pos[i] != usize::MAX {
                            jac[(row_p, na + vmag_pos[i])] = dp_dv;
                        }
                    }
                    if row_q != usize::MAX {
                        if angle_pos[i] != usize::MAX {
                            jac[(na + row_q, angle_pos[i])] = dq_dt;
                        }
                        if vmag_pos[i] != usize::MAX {
                            jac[(na + row_q, na + vmag_pos[i])] = dq_dv;
                        }
                    }
                } else {
                    let (sin, cos) = (va[i] - va[k]).sin_cos();
                    let gc_bs = g * cos + b * sin;
                    let gs_bc = g * sin - b * cos;
                    let dp_dt = vm[i] * vm[k] * gs_bc;
                    let dp_dv = vm[i] * gc_bs;
                    let dq_dt = -vm[i] * vm[k] * gc_bs;
                    let dq_dv = vm[i] * gs_bc;
                    if row_p != usize::MAX {
                        if angle_pos[k] != usize::MAX {
                            jac[(row_p, angle_pos[k])] = dp_dt;
                        }
                        if vmag_pos[k] != usize::MAX {
                            jac[(row_p, na + vmag_pos[k])] = dp_dv;
                        }
                    }
                    if row_q != usize::MAX {
                        if angle_pos[k] != usize::MAX {
                            jac[(na + row_q, angle_pos[k])] = dq_dt;
                        }
                        if vmag_pos[k] != usize::MAX {
                            jac[(na + row_q, na + vmag_pos[k])] = dq_dv;
                        }
                    }
                }
            }
        }
        jac
    }

    /// Splits the solved bus-level injections back onto individual
    /// generators. PV-bus generators keep their scheduled active power;
    /// slack generators share the bus injection weighted by scheduled
    /// output. Reactive output is shared in proportion to reactive range.
    fn recover_generator_injections(
        &self,
        kinds: &[SolveKind],
        p_calc: &[f64],
        q_calc: &[f64],
        p_load: &[f64],
        q_load: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let generators = &self.network.generators;
        let mut p_g = vec![0.0; generators.len()];
        let mut q_g = vec![0.0; generators.len()];

        for (bus_idx, gens) in self.index.gens_at_bus.iter().enumerate() {
            if gens.is_empty() {
                continue;
            }
            let q_total = q_calc[bus_idx] + q_load[bus_idx];

            match kinds[bus_idx] {
                SolveKind::Slack => {
                    let p_total = p_calc[bus_idx] + p_load[bus_idx];
                    let weights: Vec<f64> =
                        gens.iter().map(|&g| generators[g].p_g.abs()).collect();
                    for (share, &g) in apportion(p_total, &weights).into_iter().zip(gens) {
                        p_g[g] = share;
                    }
                }
                _ => {
                    for &g in gens {
                        p_g[g] = generators[g].p_g;
                    }
                }
            }

            match kinds[bus_idx] {
                SolveKind::PvAtQmin => {
                    for &g in gens {
                        q_g[g] = generators[g].q_min;
                    }
                }
                SolveKind::PvAtQmax => {
                    for &g in gens {
                        q_g[g] = generators[g].q_max;
                    }
                }
                _ => {
                    let weights: Vec<f64> = gens
                        .iter()
                        .map(|&g| generators[g].q_max - generators[g].q_min)
                        .collect();
                    for (share, &g) in apportion(q_total, &weights).into_iter().zip(gens) {
                        q_g[g] = share;
                    }
                }
            }
        }
        (p_g, q_g)
    }
}

/// Solves the AC power flow for `network` with each plant's voltage setpoint
/// applied to all of its generators' buses.
///
/// Setpoints must lie in `[0.9, 1.1]`; clipping is the caller's concern.
/// Generator reactive limits are enforced by PV->PQ switching, re-checked
/// every iteration. The returned solution has `converged = false` when the
/// iteration budget is exhausted or the Jacobian goes singular.
///
/// Prefer [`PreparedNetwork`] when solving the same grid many times.
pub fn solve_power_flow(
    network: &GridNetwork,
    plant_setpoints: &[f64],
    options: SolverOptions,
) -> PowerFlowSolution {
    let prepared = PreparedNetwork::new(network.clone());
    let p_load: Vec<f64> = network.buses.iter().map(|b| b.p_load).collect();
    let q_load: Vec<f64> = network.buses.iter().map(|b| b.q_load).collect();
    prepared.solve(&p_load, &q_load, plant_setpoints, options)
}

/// Apparent power per branch at the given bus voltages: the larger of the
/// sending- and receiving-end values.
pub(super) fn branch_apparent_power(
    network: &GridNetwork,
    index: &NetworkIndex,
    vm: &[f64],
    va: &[f64],
) -> Vec<f64> {
    network
        .branches
        .iter()
        .map(|branch| {
            let f = index.bus_pos[&branch.from_bus];
            let t = index.bus_pos[&branch.to_bus];
            let s_from =
                line_end_power(branch.r, branch.x, branch.b_charging, vm[f], va[f], vm[t], va[t]);
            let s_to =
                line_end_power(branch.r, branch.x, branch.b_charging, vm[t], va[t], vm[f], va[f]);
            s_from.max(s_to)
        })
        .collect()
}

/// Apparent power entering the line at the `i` end.
fn line_end_power(r: f64, x: f64, b_charging: f64, vi: f64, ai: f64, vj: f64, aj: f64) -> f64 {
    let y = Complex64::new(r, x).inv();
    let (g, b) = (y.re, y.im);
    let b0 = b_charging / 2.0;
    let theta = ai - aj;
    let (sin, cos) = theta.sin_cos();
    let p = g * vi * vi - vi * vj * (g * cos + b * sin);
    let q = -vi * vi * (b0 + b) - vi * vj * (g * sin - b * cos);
    p.hypot(q)
}

/// Splits `total` by `weights`, falling back to an equal split when the
/// weights vanish.
fn apportion(total: f64, weights: &[f64]) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    if sum.abs() < 1e-12 {
        vec![total / weights.len() as f64; weights.len()]
    } else {
        weights.iter().map(|w| total * w / sum).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerflow::{Branch, Bus, Generator, Plant};

    fn bus(id: usize, kind: BusKind, v_set: Option<f64>, p_load: f64, q_load: f64) -> Bus {
        Bus {
            id,
            kind,
            v_set,
            p_load,
            q_load,
            v_min: 0.95,
            v_max: 1.05,
            shunt_g: 0.0,
            shunt_b: 0.0,
        }
    }

    fn two_bus(p_load: f64, q_load: f64) -> GridNetwork {
        GridNetwork {
            name: "two-bus".to_string(),
            base_mva: 100.0,
            buses: vec![
                bus(1, BusKind::Slack, Some(1.0), 0.0, 0.0),
                bus(2, BusKind::Pq, None, p_load, q_load),
            ],
            branches: vec![Branch {
                from_bus: 1,
                to_bus: 2,
                r: 0.0,
                x: 0.1,
                b_charging: 0.0,
                s_max: 1.0,
            }],
            generators: vec![Generator {
                bus_id: 1,
                plant_id: 1,
                p_g: 0.0,
                q_min: -5.0,
                q_max: 5.0,
            }],
            plants: vec![Plant {
                id: 1,
                name: "slack".to_string(),
            }],
        }
    }

    #[test]
    fn admittance_single_branch() {
        let net = two_bus(0.0, 0.0);
        let y = build_admittance(&net);
        // y_series = 1/(j 0.1) = -10j
        assert!((y[(0, 0)] - Complex64::new(0.0, -10.0)).norm() < 1e-12);
        assert!((y[(1, 1)] - Complex64::new(0.0, -10.0)).norm() < 1e-12);
        assert!((y[(0, 1)] - Complex64::new(0.0, 10.0)).norm() < 1e-12);
        assert!((y[(1, 0)] - Complex64::new(0.0, 10.0)).norm() < 1e-12);
    }

    #[test]
    fn admittance_line_charging_on_diagonal() {
        let mut net = two_bus(0.0, 0.0);
        net.branches[0].b_charging = 0.2;
        let y = build_admittance(&net);
        assert!((y[(0, 0)] - Complex64::new(0.0, -10.0 + 0.1)).norm() < 1e-12);
        assert!((y[(1, 1)] - Complex64::new(0.0, -10.0 + 0.1)).norm() < 1e-12);
        // off-diagonals unchanged by charging
        assert!((y[(0, 1)] - Complex64::new(0.0, 10.0)).norm() < 1e-12);
    }

    #[test]
    fn admittance_parallel_branches_add() {
        let mut net = two_bus(0.0, 0.0);
        net.branches.push(net.branches[0].clone());
        let y2 = build_admittance(&net);
        let y1 = build_admittance(&two_bus(0.0, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                assert!((y2[(i, j)] - y1[(i, j)] * 2.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_no_load_case_converges_immediately() {
        let net = two_bus(0.0, 0.0);
        let sol = solve_power_flow(&net, &[1.0], SolverOptions::default());
        assert!(sol.converged);
        assert!(sol.iterations <= 2);
        assert!(sol.v_m.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(sol.v_a.iter().all(|&a| a.abs() < 1e-12));
        assert!(sol.s_line.iter().all(|&s| s.abs() < 1e-12));
    }

    /// Closed form for the lossless two-bus case with zero reactive load:
    /// v2 = sqrt((1 + sqrt(1 - 4 p^2 x^2)) / 2).
    fn two_bus_closed_form(p_load: f64, x: f64) -> f64 {
        ((1.0 + (1.0 - 4.0 * p_load * p_load * x * x).sqrt()) / 2.0).sqrt()
    }

    #[test]
    fn two_bus_matches_closed_form() {
        let net = two_bus(0.5, 0.0);
        let sol = solve_power_flow(&net, &[1.0], SolverOptions::default());
        assert!(sol.converged);
        let expected = two_bus_closed_form(0.5, 0.1);
        assert!(
            (sol.v_m[1] - expected).abs() < 1e-8,
            "got {}, expected {}",
            sol.v_m[1],
            expected
        );
        // apparent power at the slack end: p = 0.5 (lossless), q from the
        // closed-form angle
        let theta2 = (-0.5 * 0.1 / sol.v_m[1]).asin();
        let q1 = -10.0 * (sol.v_m[1] * theta2.cos() - 1.0); // q at bus 1 into the line
        let expected_s = 0.5f64.hypot(q1);
        assert!((sol.s_line[0] - expected_s).abs() < 1e-6);
    }

    #[test]
    fn receiving_voltage_monotone_in_load() {
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let p = 0.5 * k as f64;
            let net = two_bus(p, 0.0);
            let sol = solve_power_flow(&net, &[1.0], SolverOptions::default());
            if !sol.converged {
                break;
            }
            assert!(
                sol.v_m[1] < prev,
                "v_m must strictly decrease as load grows"
            );
            prev = sol.v_m[1];
        }
    }

    #[test]
    fn heavy_load_diverges() {
        // beyond the nose of the PV curve: max transferable is 5 pu at x=0.1
        let net = two_bus(6.0, 0.0);
        let sol = solve_power_flow(&net, &[1.0], SolverOptions::default());
        assert!(!sol.converged);
    }

    #[test]
    fn lossless_line_conserves_active_power() {
        let net = two_bus(0.5, 0.0);
        let sol = solve_power_flow(&net, &[1.0], SolverOptions::default());
        // slack generation equals the load: no resistive loss
        assert!((sol.p_g[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn determinism_bit_identical() {
        let net = two_bus(0.5, 0.1);
        let a = solve_power_flow(&net, &[1.02], SolverOptions::default());
        let b = solve_power_flow(&net, &[1.02], SolverOptions::default());
        assert_eq!(a.v_m, b.v_m);
        assert_eq!(a.v_a, b.v_a);
        assert_eq!(a.s_line, b.s_line);
        assert_eq!(a.q_g, b.q_g);
    }

    #[test]
    fn prepared_network_matches_one_shot_solve() {
        let net = two_bus(0.5, 0.1);
        let prepared = PreparedNetwork::new(net.clone());
        let p: Vec<f64> = net.buses.iter().map(|b| b.p_load).collect();
        let q: Vec<f64> = net.buses.iter().map(|b| b.q_load).collect();
        let a = prepared.solve(&p, &q, &[1.02], SolverOptions::default());
        let b = solve_power_flow(&net, &[1.02], SolverOptions::default());
        assert_eq!(a.v_m, b.v_m);
        assert_eq!(a.v_a, b.v_a);
        assert_eq!(a.q_g, b.q_g);

        // and with overridden loads it matches a re-built network
        let p2: Vec<f64> = p.iter().map(|v| v * 1.3).collect();
        let q2: Vec<f64> = q.iter().map(|v| v * 1.3).collect();
        let mut net2 = net.clone();
        net2.buses[1].p_load = p2[1];
        net2.buses[1].q_load = q2[1];
        let c = prepared.solve(&p2, &q2, &[1.02], SolverOptions::default());
        let d = solve_power_flow(&net2, &[1.02], SolverOptions::default());
        assert_eq!(c.v_m, d.v_m);
    }

    fn three_bus_with_pv(q_max: f64) -> GridNetwork {
        GridNetwork {
            name: "three-bus".to_string(),
            base_mva: 100.0,
            buses: vec![
                bus(1, BusKind::Slack, Some(1.0), 0.0, 0.0),
                bus(2, BusKind::Pv, Some(1.05), 0.0, 0.0),
                bus(3, BusKind::Pq, None, 0.8, 0.4),
            ],
            branches: vec![
                Branch {
                    from_bus: 1,
                    to_bus: 3,
                    r: 0.01,
                    x: 0.1,
                    b_charging: 0.0,
                    s_max: 2.0,
                },
                Branch {
                    from_bus: 2,
                    to_bus: 3,
                    r: 0.01,
                    x: 0.1,
                    b_charging: 0.0,
                    s_max: 2.0,
                },
            ],
            generators: vec![
                Generator {
                    bus_id: 1,
                    plant_id: 1,
                    p_g: 0.0,
                    q_min: -5.0,
                    q_max: 5.0,
                },
                Generator {
                    bus_id: 2,
                    plant_id: 2,
                    p_g: 0.4,
                    q_min: -q_max,
                    q_max,
                },
            ],
            plants: vec![
                Plant {
                    id: 1,
                    name: "a".to_string(),
                },
                Plant {
                    id: 2,
                    name: "b".to_string(),
                },
            ],
        }
    }

    #[test]
    fn pv_bus_holds_setpoint_with_ample_q() {
        let net = three_bus_with_pv(5.0);
        let sol = solve_power_flow(&net, &[1.0, 1.05], SolverOptions::default());
        assert!(sol.converged);
        assert!((sol.v_m[1] - 1.05).abs() < 1e-10);
        assert!(sol.q_g[1].abs() < 5.0);
    }

    #[test]
    fn pv_bus_pinned_at_q_limit() {
        let net = three_bus_with_pv(0.05);
        let sol = solve_power_flow(&net, &[1.0, 1.05], SolverOptions::default());
        assert!(sol.converged);
        // limited machine cannot hold 1.05: pinned at q_max, voltage sags
        assert!((sol.q_g[1] - 0.05).abs() < 1e-9);
        assert!(sol.v_m[1] < 1.05);
    }

    #[test]
    fn setpoint_applied_to_plant_buses() {
        let net = three_bus_with_pv(5.0);
        let sol = solve_power_flow(&net, &[0.98, 1.02], SolverOptions::default());
        assert!(sol.converged);
        assert!((sol.v_m[0] - 0.98).abs() < 1e-12);
        assert!((sol.v_m[1] - 1.02).abs() < 1e-10);
    }
}
