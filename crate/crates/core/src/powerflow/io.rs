//! Plain-text network file format.
//!
//! A network file has four column sections plus a `[network]` header:
//!
//! ```text
//! [network]
//! name = desk14
//! base_mva = 100.0
//!
//! [bus]       id kind v_set p_load q_load v_min v_max shunt_g shunt_b
//! [branch]    from to r x b_charging s_max
//! [generator] bus plant p_g q_min q_max
//! [plant]     id name
//! ```
//!
//! `kind` is one of `slack|pv|pq`; `v_set` is `-` for PQ buses. `#` starts a
//! comment. All quantities are p.u. on `base_mva`. See `docs/formats.md`.

use super::{Branch, Bus, BusKind, Generator, GridNetwork, NetworkError, Plant};

const DESK14: &str = include_str!("../../data/desk14.grid");

/// The built-in 14-bus, 20-branch, 5-generator, 4-plant desk network.
pub fn desk14() -> GridNetwork {
    parse_network(DESK14).expect("bundled desk14 network is valid")
}

enum Section {
    None,
    Network,
    Bus,
    Branch,
    Generator,
    Plant,
}

fn parse_err(line: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(
    tokens: &[&str],
    idx: usize,
    line: usize,
    what: &str,
) -> Result<T, NetworkError> {
    let raw = tokens
        .get(idx)
        .ok_or_else(|| parse_err(line, format!("missing field `{what}`")))?;
    raw.parse()
        .map_err(|_| parse_err(line, format!("bad value `{raw}` for `{what}`")))
}

/// Parses and validates a network file.
pub fn parse_network(text: &str) -> Result<GridNetwork, NetworkError> {
    let mut section = Section::None;
    let mut name = String::new();
    let mut base_mva = 100.0;
    let mut buses = Vec::new();
    let mut branches = Vec::new();
    let mut generators = Vec::new();
    let mut plants = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, "unterminated section header"))?;
            section = match header {
                "network" => Section::Network,
                "bus" => Section::Bus,
                "branch" => Section::Branch,
                "generator" => Section::Generator,
                "plant" => Section::Plant,
                other => return Err(parse_err(line, format!("unknown section `{other}`"))),
            };
            continue;
        }

        match section {
            Section::None => return Err(parse_err(line, "data before any section header")),
            Section::Network => {
                let mut parts = content.splitn(2, '=');
                let key = parts.next().unwrap_or("").trim();
                let value = parts
                    .next()
                    .ok_or_else(|| parse_err(line, "expected `key = value`"))?
                    .trim();
                match key {
                    "name" => name = value.to_string(),
                    "base_mva" => {
                        base_mva = value
                            .parse()
                            .map_err(|_| parse_err(line, format!("bad base_mva `{value}`")))?
                    }
                    other => return Err(parse_err(line, format!("unknown key `{other}`"))),
                }
            }
            Section::Bus => {
                let t: Vec<&str> = content.split_whitespace().collect();
                let kind = match *t
                    .get(1)
                    .ok_or_else(|| parse_err(line, "missing field `kind`"))?
                {
                    "slack" => BusKind::Slack,
                    "pv" => BusKind::Pv,
                    "pq" => BusKind::Pq,
                    other => {
                        return Err(parse_err(line, format!("unknown bus kind `{other}`")))
                    }
                };
                let v_set = match *t
                    .get(2)
                    .ok_or_else(|| parse_err(line, "missing field `v_set`"))?
                {
                    "-" => None,
                    raw => Some(
                        raw.parse()
                            .map_err(|_| parse_err(line, format!("bad v_set `{raw}`")))?,
                    ),
                };
                buses.push(Bus {
                    id: field(&t, 0, line, "id")?,
                    kind,
                    v_set,
                    p_load: field(&t, 3, line, "p_load")?,
                    q_load: field(&t, 4, line, "q_load")?,
                    v_min: field(&t, 5, line, "v_min")?,
                    v_max: field(&t, 6, line, "v_max")?,
                    shunt_g: field(&t, 7, line, "shunt_g")?,
                    shunt_b: field(&t, 8, line, "shunt_b")?,
                });
            }
            Section::Branch => {
                let t: Vec<&str> = content.split_whitespace().collect();
                branches.push(Branch {
                    from_bus: field(&t, 0, line, "from")?,
                    to_bus: field(&t, 1, line, "to")?,
                    r: field(&t, 2, line, "r")?,
                    x: field(&t, 3, line, "x")?,
                    b_charging: field(&t, 4, line, "b_charging")?,
                    s_max: field(&t, 5, line, "s_max")?,
                });
            }
            Section::Generator => {
                let t: Vec<&str> = content.split_whitespace().collect();
                generators.push(Generator {
                    bus_id: field(&t, 0, line, "bus")?,
                    plant_id: field(&t, 1, line, "plant")?,
                    p_g: field(&t, 2, line, "p_g")?,
                    q_min: field(&t, 3, line, "q_min")?,
                    q_max: field(&t, 4, line, "q_max")?,
                });
            }
            Section::Plant => {
                let t: Vec<&str> = content.split_whitespace().collect();
                plants.push(Plant {
                    id: field(&t, 0, line, "id")?,
                    name: t.get(1).unwrap_or(&"").to_string(),
                });
            }
        }
    }

    let network = GridNetwork {
        name,
        base_mva,
        buses,
        branches,
        generators,
        plants,
    };
    network.validate()?;
    Ok(network)
}

/// Writes a network back out in the file format. Round-trips through
/// [`parse_network`] up to float formatting.
pub fn format_network(network: &GridNetwork) -> String {
    let mut out = String::new();
    out.push_str("[network]\n");
    out.push_str(&format!("name = {}\n", network.name));
    out.push_str(&format!("base_mva = {}\n\n", network.base_mva));

    out.push_str("[bus]\n# id kind v_set p_load q_load v_min v_max shunt_g shunt_b\n");
    for b in &network.buses {
        let kind = match b.kind {
            BusKind::Slack => "slack",
            BusKind::Pv => "pv",
            BusKind::Pq => "pq",
        };
        let v_set = b.v_set.map_or("-".to_string(), |v| v.to_string());
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {} {}\n",
            b.id, kind, v_set, b.p_load, b.q_load, b.v_min, b.v_max, b.shunt_g, b.shunt_b
        ));
    }

    out.push_str("\n[branch]\n# from to r x b_charging s_max\n");
    for br in &network.branches {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            br.from_bus, br.to_bus, br.r, br.x, br.b_charging, br.s_max
        ));
    }

    out.push_str("\n[generator]\n# bus plant p_g q_min q_max\n");
    for g in &network.generators {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            g.bus_id, g.plant_id, g.p_g, g.q_min, g.q_max
        ));
    }

    out.push_str("\n[plant]\n# id name\n");
    for p in &network.plants {
        out.push_str(&format!("{} {}\n", p.id, p.name));
    }
    out
}
