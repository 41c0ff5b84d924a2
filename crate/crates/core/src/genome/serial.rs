//! Line-oriented textual genome format.
//!
//! ```text
//! genome <num_inputs> <num_modules> <family>
//! node <id> <input|hidden|output> <activation|-> <module|-> <W|B|P|->
//! link <innovation> <source> <target> <weight> <0|1>
//! ```
//!
//! Weights are written with 17 significant decimal digits so round-trips
//! are lossless. `#` starts a comment line.

use super::{
    DecodeFamily, Genome, Innovation, LinkGene, NodeGene, NodeId, NodeRole, OutputRole,
};
use crate::activation::Activation;
use crate::error::{Error, Result};
use std::fmt::Write as _;

impl Genome {
    /// Serialize to the textual format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "genome {} {} {}",
            self.num_inputs(),
            self.num_modules,
            self.family.token()
        )
        .unwrap();
        for n in &self.nodes {
            let (role, activation, module, output_role) = match n.role {
                NodeRole::Input => ("input", None, None, None),
                NodeRole::Hidden { activation } => ("hidden", Some(activation), None, None),
                NodeRole::Output {
                    activation,
                    module,
                    role,
                } => ("output", Some(activation), Some(module), Some(role)),
            };
            writeln!(
                out,
                "node {} {} {} {} {}",
                n.id,
                role,
                activation.map_or("-".to_string(), |a| a.to_string()),
                module.map_or("-".to_string(), |m| m.to_string()),
                output_role.map_or("-", |r| r.token()),
            )
            .unwrap();
        }
        for l in &self.links {
            writeln!(
                out,
                "link {} {} {} {:.16e} {}",
                l.innovation,
                l.source,
                l.target,
                l.weight,
                u8::from(l.enabled)
            )
            .unwrap();
        }
        out
    }

    /// Parse the textual format. The result is validated; corrupted input is
    /// rejected with the offending 1-based line number.
    pub fn from_text(text: &str) -> Result<Genome> {
        let mut genome: Option<Genome> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "genome" => {
                    if genome.is_some() {
                        return Err(Error::parse(line_no, "duplicate header"));
                    }
                    if fields.len() != 4 {
                        return Err(Error::parse(line_no, "header needs: genome <inputs> <modules> <family>"));
                    }
                    let num_inputs: usize = parse_field(fields[1], line_no, "num_inputs")?;
                    let num_modules: u32 = parse_field(fields[2], line_no, "num_modules")?;
                    let family: DecodeFamily = fields[3]
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("unknown family `{}`", fields[3])))?;
                    let base = 5 + usize::from(family.uses_situation_input());
                    let team_input = match num_inputs.checked_sub(base) {
                        Some(0) => false,
                        Some(1) => true,
                        _ => {
                            return Err(Error::parse(
                                line_no,
                                format!("num_inputs {num_inputs} is inconsistent with family `{}`", family.token()),
                            ))
                        }
                    };
                    genome = Some(Genome {
                        nodes: Vec::new(),
                        links: Vec::new(),
                        num_modules,
                        family,
                        team_input,
                    });
                }
                "node" => {
                    let g = genome
                        .as_mut()
                        .ok_or_else(|| Error::parse(line_no, "node record before header"))?;
                    if fields.len() != 6 {
                        return Err(Error::parse(line_no, "node needs 5 fields"));
                    }
                    let id = NodeId(parse_field(fields[1], line_no, "node id")?);
                    let activation = match fields[3] {
                        "-" => None,
                        s => Some(s.parse::<Activation>().map_err(|_| {
                            Error::parse(line_no, format!("unknown activation `{s}`"))
                        })?),
                    };
                    let role = match fields[2] {
                        "input" => NodeRole::Input,
                        "hidden" => NodeRole::Hidden {
                            activation: activation
                                .ok_or_else(|| Error::parse(line_no, "hidden node needs an activation"))?,
                        },
                        "output" => NodeRole::Output {
                            activation: activation
                                .ok_or_else(|| Error::parse(line_no, "output node needs an activation"))?,
                            module: parse_field(fields[4], line_no, "module index")?,
                            role: match fields[5] {
                                "W" => OutputRole::Weight,
                                "B" => OutputRole::Bias,
                                "P" => OutputRole::Preference,
                                s => {
                                    return Err(Error::parse(
                                        line_no,
                                        format!("unknown output role `{s}`"),
                                    ))
                                }
                            },
                        },
                        s => return Err(Error::parse(line_no, format!("unknown node role `{s}`"))),
                    };
                    g.nodes.push(NodeGene { id, role });
                }
                "link" => {
                    let g = genome
                        .as_mut()
                        .ok_or_else(|| Error::parse(line_no, "link record before header"))?;
                    if fields.len() != 6 {
                        return Err(Error::parse(line_no, "link needs 5 fields"));
                    }
                    g.links.push(LinkGene {
                        innovation: Innovation(parse_field(fields[1], line_no, "innovation")?),
                        source: NodeId(parse_field(fields[2], line_no, "source")?),
                        target: NodeId(parse_field(fields[3], line_no, "target")?),
                        weight: parse_field(fields[4], line_no, "weight")?,
                        enabled: match fields[5] {
                            "0" => false,
                            "1" => true,
                            s => {
                                return Err(Error::parse(
                                    line_no,
                                    format!("enabled flag must be 0 or 1, got `{s}`"),
                                ))
                            }
                        },
                    });
                }
                other => {
                    return Err(Error::parse(line_no, format!("unknown record `{other}`")));
                }
            }
        }

        let genome = genome.ok_or_else(|| Error::parse(1, "missing genome header"))?;
        genome.validate()?;
        Ok(genome)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{s}`")))
}
