//! Static grid model and AC power flow solution types.
//!
//! A [`GridNetwork`] is the quasi-steady-state model: buses, branches,
//! generators, and the plants that group generators under one shared voltage
//! setpoint. [`solve_power_flow`](crate::powerflow::solve_power_flow) turns a
//! network plus plant setpoints into a [`PowerFlowSolution`].
//!
//! All quantities are per-unit on `base_mva`.

mod io;
mod solver;

pub use io::{desk14, format_network, parse_network};
pub use solver::{build_admittance, solve_power_flow, PreparedNetwork, SolverOptions};

use std::collections::HashMap;
use thiserror::Error;

/// How a bus participates in the power flow equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    /// Fixes voltage magnitude and angle; absorbs the system power imbalance.
    Slack,
    /// Fixes active power and voltage magnitude (generator bus).
    Pv,
    /// Fixes active and reactive load.
    Pq,
}

/// A network node. Voltage secure zone is `[v_min, v_max]`.
#[derive(Debug, Clone)]
pub struct Bus {
    pub id: usize,
    pub kind: BusKind,
    /// Voltage setpoint in p.u.; required for slack/PV buses.
    pub v_set: Option<f64>,
    pub p_load: f64,
    pub q_load: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub shunt_g: f64,
    pub shunt_b: f64,
}

/// A transmission element between two buses. `s_max` is the apparent-power
/// rating the line flow is checked against.
#[derive(Debug, Clone)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance; half is placed at each end.
    pub b_charging: f64,
    pub s_max: f64,
}

/// A machine injecting `p_g` at its bus, with reactive capability
/// `[q_min, q_max]`. Its voltage setpoint comes from its plant.
#[derive(Debug, Clone)]
pub struct Generator {
    pub bus_id: usize,
    pub plant_id: usize,
    pub p_g: f64,
    pub q_min: f64,
    pub q_max: f64,
}

/// A group of generators receiving one shared voltage setpoint. The ordered
/// plant list defines the action vector: component `i` commands `plants[i]`.
#[derive(Debug, Clone)]
pub struct Plant {
    pub id: usize,
    pub name: String,
}

/// The static grid model.
#[derive(Debug, Clone)]
pub struct GridNetwork {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub plants: Vec<Plant>,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expected exactly one slack bus, found {0}")]
    SlackCount(usize),
    #[error("duplicate bus id {0}")]
    DuplicateBus(usize),
    #[error("duplicate plant id {0}")]
    DuplicatePlant(usize),
    #[error("{context} references unknown bus {bus}")]
    UnknownBus { bus: usize, context: String },
    #[error("generator on bus {bus} references unknown plant {plant}")]
    UnknownPlant { bus: usize, plant: usize },
    #[error("plant {0} has no generators")]
    EmptyPlant(usize),
    #[error("branch {from}-{to}: {message}")]
    BadBranch {
        from: usize,
        to: usize,
        message: String,
    },
    #[error("bus {bus}: {message}")]
    BadBus { bus: usize, message: String },
    #[error("generator on bus {bus}: {message}")]
    BadGenerator { bus: usize, message: String },
    #[error("network graph is not connected (bus {0} unreachable from slack)")]
    Disconnected(usize),
    #[error("bus {bus} hosts generators from plants {a} and {b}")]
    MixedPlantBus { bus: usize, a: usize, b: usize },
    #[error("plant {plant}: member buses have differing v_set values")]
    InconsistentPlantSetpoint { plant: usize },
}

/// Position lookups derived from a validated [`GridNetwork`].
#[derive(Debug, Clone)]
pub struct NetworkIndex {
    /// bus id -> position in `buses`
    pub bus_pos: HashMap<usize, usize>,
    /// position of the slack bus
    pub slack: usize,
    /// bus position -> indices into `generators`
    pub gens_at_bus: Vec<Vec<usize>>,
    /// plant position -> bus positions commanded by that plant (deduplicated)
    pub plant_buses: Vec<Vec<usize>>,
}

impl GridNetwork {
    /// Number of plants, i.e. the action dimension.
    pub fn n_plants(&self) -> usize {
        self.plants.len()
    }

    /// State dimension: `2*n_bus + n_branch + 2*n_gen`.
    pub fn state_dim(&self) -> usize {
        2 * self.buses.len() + self.branches.len() + 2 * self.generators.len()
    }

    /// Per-plant nominal setpoints taken from the member buses' `v_set`.
    pub fn nominal_setpoints(&self) -> Vec<f64> {
        let index = self.index();
        self.plants
            .iter()
            .enumerate()
            .map(|(p, _)| {
                let bus = index.plant_buses[p][0];
                self.buses[bus].v_set.unwrap_or(1.0)
            })
            .collect()
    }

    /// Checks every structural invariant. Call once after construction;
    /// the solver assumes a validated network.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let mut bus_pos = HashMap::new();
        for (i, bus) in self.buses.iter().enumerate() {
            if bus_pos.insert(bus.id, i).is_some() {
                return Err(NetworkError::DuplicateBus(bus.id));
            }
            if !(bus.v_min > 0.0 && bus.v_min < bus.v_max) {
                return Err(NetworkError::BadBus {
                    bus: bus.id,
                    message: format!(
                        "voltage limits must satisfy 0 < v_min < v_max, got [{}, {}]",
                        bus.v_min, bus.v_max
                    ),
                });
            }
            if let Some(v) = bus.v_set {
                if !(0.9..=1.1).contains(&v) {
                    return Err(NetworkError::BadBus {
                        bus: bus.id,
                        message: format!("v_set {v} outside [0.9, 1.1]"),
                    });
                }
            }
            if bus.kind != BusKind::Pq && bus.v_set.is_none() {
                return Err(NetworkError::BadBus {
                    bus: bus.id,
                    message: "slack/PV bus requires v_set".to_string(),
                });
            }
        }

        let slack_count = self
            .buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .count();
        if slack_count != 1 {
            return Err(NetworkError::SlackCount(slack_count));
        }

        for br in &self.branches {
            if br.from_bus == br.to_bus {
                return Err(NetworkError::BadBranch {
                    from: br.from_bus,
                    to: br.to_bus,
                    message: "endpoints must differ".to_string(),
                });
            }
            for end in [br.from_bus, br.to_bus] {
                if !bus_pos.contains_key(&end) {
                    return Err(NetworkError::UnknownBus {
                        bus: end,
                        context: format!("branch {}-{}", br.from_bus, br.to_bus),
                    });
                }
            }
            if br.x == 0.0 {
                return Err(NetworkError::BadBranch {
                    from: br.from_bus,
                    to: br.to_bus,
                    message: "series reactance must be nonzero".to_string(),
                });
            }
            if br.s_max <= 0.0 {
                return Err(NetworkError::BadBranch {
                    from: br.from_bus,
                    to: br.to_bus,
                    message: "apparent-power rating must be positive".to_string(),
                });
            }
        }

        let mut plant_pos = HashMap::new();
        for (i, plant) in self.plants.iter().enumerate() {
            if plant_pos.insert(plant.id, i).is_some() {
                return Err(NetworkError::DuplicatePlant(plant.id));
            }
        }

        let mut plant_has_gen = vec![false; self.plants.len()];
        let mut bus_plant: HashMap<usize, usize> = HashMap::new();
        for gen in &self.generators {
            let Some(&bus_idx) = bus_pos.get(&gen.bus_id) else {
                return Err(NetworkError::UnknownBus {
                    bus: gen.bus_id,
                    context: "generator".to_string(),
                });
            };
            let Some(&plant_idx) = plant_pos.get(&gen.plant_id) else {
                return Err(NetworkError::UnknownPlant {
                    bus: gen.bus_id,
                    plant: gen.plant_id,
                });
            };
            if gen.q_min > gen.q_max {
                return Err(NetworkError::BadGenerator {
                    bus: gen.bus_id,
                    message: format!("q_min {} > q_max {}", gen.q_min, gen.q_max),
                });
            }
            if self.buses[bus_idx].kind == BusKind::Pq {
                return Err(NetworkError::BadGenerator {
                    bus: gen.bus_id,
                    message: "generators must sit on slack/PV buses".to_string(),
                });
            }
            plant_has_gen[plant_idx] = true;
            if let Some(&other) = bus_plant.get(&gen.bus_id) {
                if other != gen.plant_id {
                    return Err(NetworkError::MixedPlantBus {
                        bus: gen.bus_id,
                        a: other,
                        b: gen.plant_id,
                    });
                }
            } else {
                bus_plant.insert(gen.bus_id, gen.plant_id);
            }
        }
        for (i, has) in plant_has_gen.iter().enumerate() {
            if !has {
                return Err(NetworkError::EmptyPlant(self.plants[i].id));
            }
        }

        // slack/PV buses must be commanded by some plant
        for bus in &self.buses {
            if bus.kind != BusKind::Pq && !bus_plant.contains_key(&bus.id) {
                return Err(NetworkError::BadBus {
                    bus: bus.id,
                    message: "slack/PV bus hosts no generator".to_string(),
                });
            }
        }

        // buses sharing a plant must agree on the nominal setpoint
        for (p, plant) in self.plants.iter().enumerate() {
            let members: Vec<&Bus> = self
                .buses
                .iter()
                .filter(|b| bus_plant.get(&b.id) == Some(&plant.id))
                .collect();
            let _ = p;
            if let Some(first) = members.first() {
                for other in &members[1..] {
                    if (other.v_set.unwrap_or(1.0) - first.v_set.unwrap_or(1.0)).abs() > 1e-12 {
                        return Err(NetworkError::InconsistentPlantSetpoint { plant: plant.id });
                    }
                }
            }
        }

        // connectivity by BFS from the slack bus
        let n = self.buses.len();
        let slack = self
            .buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .unwrap();
        let mut adjacency = vec![Vec::new(); n];
        for br in &self.branches {
            let f = bus_pos[&br.from_bus];
            let t = bus_pos[&br.to_bus];
            adjacency[f].push(t);
            adjacency[t].push(f);
        }
        let mut seen = vec![false; n];
        let mut queue = vec![slack];
        seen[slack] = true;
        while let Some(i) = queue.pop() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push(j);
                }
            }
        }
        if let Some(unreached) = seen.iter().position(|s| !s) {
            return Err(NetworkError::Disconnected(self.buses[unreached].id));
        }

        Ok(())
    }

    /// Builds position lookups. Assumes the network validated.
    pub fn index(&self) -> NetworkIndex {
        let bus_pos: HashMap<usize, usize> = self
            .buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect();
        let slack = self
            .buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated network has a slack bus");
        let mut gens_at_bus = vec![Vec::new(); self.buses.len()];
        for (g, gen) in self.generators.iter().enumerate() {
            gens_at_bus[bus_pos[&gen.bus_id]].push(g);
        }
        let mut plant_buses = vec![Vec::new(); self.plants.len()];
        for (p, plant) in self.plants.iter().enumerate() {
            for gen in &self.generators {
                if gen.plant_id == plant.id {
                    let b = bus_pos[&gen.bus_id];
                    if !plant_buses[p].contains(&b) {
                        plant_buses[p].push(b);
                    }
                }
            }
        }
        NetworkIndex {
            bus_pos,
            slack,
            gens_at_bus,
            plant_buses,
        }
    }
}

/// A converged (or failed) operating point.
///
/// Vectors follow network ordering: `v_m`/`v_a` per bus, `s_line` per branch
/// (the larger of the two line-end apparent powers), `p_g`/`q_g` per
/// generator.
#[derive(Debug, Clone)]
pub struct PowerFlowSolution {
    pub v_m: Vec<f64>,
    pub v_a: Vec<f64>,
    pub s_line: Vec<f64>,
    pub p_g: Vec<f64>,
    pub q_g: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus() -> GridNetwork {
        GridNetwork {
            name: "two-bus".to_string(),
            base_mva: 100.0,
            buses: vec![
                Bus {
                    id: 1,
                    kind: BusKind::Slack,
                    v_set: Some(1.0),
                    p_load: 0.0,
                    q_load: 0.0,
                    v_min: 0.95,
                    v_max: 1.05,
                    shunt_g: 0.0,
                    shunt_b: 0.0,
                },
                Bus {
                    id: 2,
                    kind: BusKind::Pq,
                    v_set: None,
                    p_load: 0.5,
                    q_load: 0.0,
                    v_min: 0.95,
                    v_max: 1.05,
                    shunt_g: 0.0,
                    shunt_b: 0.0,
                },
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
    fn valid_two_bus_passes() {
        two_bus().validate().unwrap();
    }

    #[test]
    fn rejects_missing_slack() {
        let mut net = two_bus();
        net.buses[0].kind = BusKind::Pv;
        assert!(matches!(net.validate(), Err(NetworkError::SlackCount(0))));
    }

    #[test]
    fn rejects_zero_reactance() {
        let mut net = two_bus();
        net.branches[0].x = 0.0;
        assert!(matches!(net.validate(), Err(NetworkError::BadBranch { .. })));
    }

    #[test]
    fn rejects_disconnected_bus() {
        let mut net = two_bus();
        net.buses.push(Bus {
            id: 3,
            kind: BusKind::Pq,
            v_set: None,
            p_load: 0.0,
            q_load: 0.0,
            v_min: 0.95,
            v_max: 1.05,
            shunt_g: 0.0,
            shunt_b: 0.0,
        });
        assert!(matches!(net.validate(), Err(NetworkError::Disconnected(3))));
    }

    #[test]
    fn rejects_generator_plant_mismatch() {
        let mut net = two_bus();
        net.generators[0].plant_id = 9;
        assert!(matches!(net.validate(), Err(NetworkError::UnknownPlant { .. })));
    }

    #[test]
    fn rejects_inverted_q_limits() {
        let mut net = two_bus();
        net.generators[0].q_min = 1.0;
        net.generators[0].q_max = -1.0;
        assert!(matches!(net.validate(), Err(NetworkError::BadGenerator { .. })));
    }

    #[test]
    fn state_dim_formula() {
        assert_eq!(two_bus().state_dim(), 2 * 2 + 1 + 2 * 1);
    }
}
