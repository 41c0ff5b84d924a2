//! Arena environments: built-in defaults and the plain-text file format.

use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::geometry::{Segment, Vec2};
use std::fmt::Write as _;
use std::path::Path;

/// A named polygon used by task-division oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub polygon: Vec<Vec2>,
}

/// Initial robot pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartPose {
    pub position: Vec2,
    pub heading: f64,
}

/// A complete arena description.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub walls: Vec<Segment>,
    /// Goal points. Their meaning is per-domain: ordered visit sequence
    /// (lone patrol, foraging, two rooms), per-robot targets (team patrol)
    /// or the single navigation goal (hallway).
    pub waypoints: Vec<Vec2>,
    /// Scoring-only goals, invisible to sensors (two rooms hallway).
    pub breadcrumbs: Vec<Vec2>,
    pub regions: Vec<Region>,
    pub starts: Vec<StartPose>,
    /// The domain's maximum distance `D`; defaults to the wall bounding-box
    /// diagonal.
    pub max_distance: f64,
}

fn bounding_box_diagonal(walls: &[Segment]) -> f64 {
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for w in walls {
        for p in [w.a, w.b] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
    }
    ((max.x - min.x).powi(2) + (max.y - min.y).powi(2)).sqrt()
}

fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Segment> {
    let a = Vec2::new(x0, y0);
    let b = Vec2::new(x1, y0);
    let c = Vec2::new(x1, y1);
    let d = Vec2::new(x0, y1);
    vec![
        Segment::new(a, b),
        Segment::new(b, c),
        Segment::new(c, d),
        Segment::new(d, a),
    ]
}

/// The plus-sign arena shared by both patrol domains: four 100 x 40 arms
/// meeting at a 40 x 40 center.
fn plus_walls() -> Vec<Segment> {
    let pts = [
        // Clockwise outline starting at the north arm's west side.
        (-20.0, 20.0),
        (-20.0, 120.0),
        (20.0, 120.0),
        (20.0, 20.0),
        (120.0, 20.0),
        (120.0, -20.0),
        (20.0, -20.0),
        (20.0, -120.0),
        (-20.0, -120.0),
        (-20.0, -20.0),
        (-120.0, -20.0),
        (-120.0, 20.0),
    ];
    (0..pts.len())
        .map(|i| {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % pts.len()];
            Segment::new(Vec2::new(x0, y0), Vec2::new(x1, y1))
        })
        .collect()
}

impl Environment {
    fn with_defaults(
        walls: Vec<Segment>,
        waypoints: Vec<Vec2>,
        breadcrumbs: Vec<Vec2>,
        regions: Vec<Region>,
        starts: Vec<StartPose>,
    ) -> Environment {
        let max_distance = bounding_box_diagonal(&walls);
        Environment {
            walls,
            waypoints,
            breadcrumbs,
            regions,
            starts,
            max_distance,
        }
    }

    /// Team patrol: three robots start in the south arm and must spread to
    /// waypoints 10 units from the west, east and north arm ends.
    pub fn team_patrol() -> Environment {
        Environment::with_defaults(
            plus_walls(),
            vec![
                Vec2::new(-110.0, 0.0),
                Vec2::new(110.0, 0.0),
                Vec2::new(0.0, 110.0),
            ],
            Vec::new(),
            Vec::new(),
            vec![
                StartPose {
                    position: Vec2::new(0.0, -80.0),
                    heading: std::f64::consts::FRAC_PI_2,
                },
                StartPose {
                    position: Vec2::new(0.0, -95.0),
                    heading: std::f64::consts::FRAC_PI_2,
                },
                StartPose {
                    position: Vec2::new(0.0, -110.0),
                    heading: std::f64::consts::FRAC_PI_2,
                },
            ],
        )
    }

    /// Lone patrol: one robot, same plus arena. The waypoint order (west,
    /// east, north) forces a left turn, a straight crossing and a right
    /// turn at the central intersection before returning home.
    pub fn lone_patrol() -> Environment {
        Environment::with_defaults(
            plus_walls(),
            vec![
                Vec2::new(-110.0, 0.0),
                Vec2::new(110.0, 0.0),
                Vec2::new(0.0, 110.0),
            ],
            Vec::new(),
            Vec::new(),
            vec![StartPose {
                position: Vec2::new(0.0, -110.0),
                heading: std::f64::consts::FRAC_PI_2,
            }],
        )
    }

    /// Dual task, navigation half: a 200 x 30 hallway; the goal sits 10
    /// units from the far end.
    pub fn dual_hallway() -> Environment {
        Environment::with_defaults(
            rectangle(0.0, -15.0, 200.0, 15.0),
            vec![Vec2::new(190.0, 0.0)],
            Vec::new(),
            Vec::new(),
            vec![StartPose {
                position: Vec2::new(10.0, 0.0),
                heading: 0.0,
            }],
        )
    }

    /// Dual task, foraging half: a 150 x 150 room with four waypoints to
    /// visit in order.
    pub fn dual_forage() -> Environment {
        Environment::with_defaults(
            rectangle(0.0, 0.0, 150.0, 150.0),
            vec![
                Vec2::new(40.0, 110.0),
                Vec2::new(110.0, 110.0),
                Vec2::new(110.0, 40.0),
                Vec2::new(40.0, 40.0),
            ],
            Vec::new(),
            Vec::new(),
            vec![StartPose {
                position: Vec2::new(75.0, 75.0),
                heading: std::f64::consts::FRAC_PI_2,
            }],
        )
    }

    /// Two rooms: two 150 x 150 foraging rooms joined by an S-shaped
    /// corridor of width 30. Five waypoints per room; five scoring-only
    /// breadcrumbs spaced evenly along the corridor spine.
    pub fn two_rooms() -> Environment {
        let mut walls = Vec::new();
        // Lower room with an opening at x in [105, 135] on its top wall.
        walls.push(Segment::new(Vec2::new(0.0, 0.0), Vec2::new(150.0, 0.0)));
        walls.push(Segment::new(Vec2::new(0.0, 0.0), Vec2::new(0.0, 150.0)));
        walls.push(Segment::new(Vec2::new(150.0, 0.0), Vec2::new(150.0, 150.0)));
        walls.push(Segment::new(Vec2::new(0.0, 150.0), Vec2::new(105.0, 150.0)));
        walls.push(Segment::new(Vec2::new(135.0, 150.0), Vec2::new(150.0, 150.0)));
        // Corridor, outer boundary.
        walls.push(Segment::new(Vec2::new(135.0, 150.0), Vec2::new(135.0, 200.0)));
        walls.push(Segment::new(Vec2::new(135.0, 200.0), Vec2::new(45.0, 200.0)));
        walls.push(Segment::new(Vec2::new(45.0, 200.0), Vec2::new(45.0, 250.0)));
        // Corridor, inner boundary.
        walls.push(Segment::new(Vec2::new(105.0, 150.0), Vec2::new(105.0, 170.0)));
        walls.push(Segment::new(Vec2::new(105.0, 170.0), Vec2::new(15.0, 170.0)));
        walls.push(Segment::new(Vec2::new(15.0, 170.0), Vec2::new(15.0, 250.0)));
        // Upper room with an opening at x in [15, 45] on its bottom wall.
        walls.push(Segment::new(Vec2::new(0.0, 250.0), Vec2::new(15.0, 250.0)));
        walls.push(Segment::new(Vec2::new(45.0, 250.0), Vec2::new(150.0, 250.0)));
        walls.push(Segment::new(Vec2::new(0.0, 250.0), Vec2::new(0.0, 400.0)));
        walls.push(Segment::new(Vec2::new(150.0, 250.0), Vec2::new(150.0, 400.0)));
        walls.push(Segment::new(Vec2::new(0.0, 400.0), Vec2::new(150.0, 400.0)));

        // Breadcrumbs along the corridor spine at fractions 1/6 .. 5/6.
        let spine = [
            Vec2::new(120.0, 150.0),
            Vec2::new(120.0, 185.0),
            Vec2::new(30.0, 185.0),
            Vec2::new(30.0, 250.0),
        ];
        let mut leg_lengths = Vec::new();
        let mut total = 0.0;
        for pair in spine.windows(2) {
            let len = pair[0].distance(pair[1]);
            leg_lengths.push(len);
            total += len;
        }
        let mut breadcrumbs = Vec::new();
        for k in 1..=5 {
            let mut along = total * k as f64 / 6.0;
            let mut crumb = spine[0];
            for (i, &len) in leg_lengths.iter().enumerate() {
                if along <= len {
                    let dir = spine[i + 1] - spine[i];
                    crumb = spine[i] + dir * (along / len);
                    break;
                }
                along -= len;
            }
            breadcrumbs.push(crumb);
        }

        let hallway = Region {
            name: "hallway".to_string(),
            polygon: vec![
                Vec2::new(105.0, 150.0),
                Vec2::new(135.0, 150.0),
                Vec2::new(135.0, 200.0),
                Vec2::new(45.0, 200.0),
                Vec2::new(45.0, 250.0),
                Vec2::new(15.0, 250.0),
                Vec2::new(15.0, 170.0),
                Vec2::new(105.0, 170.0),
            ],
        };

        Environment::with_defaults(
            walls,
            vec![
                // Lower room, in visit order, funneling toward the corridor.
                Vec2::new(75.0, 30.0),
                Vec2::new(120.0, 30.0),
                Vec2::new(75.0, 75.0),
                Vec2::new(30.0, 120.0),
                Vec2::new(120.0, 135.0),
                // Upper room, starting at the corridor exit.
                Vec2::new(30.0, 280.0),
                Vec2::new(75.0, 310.0),
                Vec2::new(120.0, 280.0),
                Vec2::new(120.0, 370.0),
                Vec2::new(30.0, 370.0),
            ],
            breadcrumbs,
            vec![hallway],
            vec![StartPose {
                position: Vec2::new(30.0, 30.0),
                heading: 0.0,
            }],
        )
    }

    /// The default environment(s) for a domain; dual task carries a second
    /// environment for the foraging half.
    pub fn for_domain(domain: DomainKind) -> (Environment, Option<Environment>) {
        match domain {
            DomainKind::TeamPatrol => (Environment::team_patrol(), None),
            DomainKind::LonePatrol => (Environment::lone_patrol(), None),
            DomainKind::DualTask => (Environment::dual_hallway(), Some(Environment::dual_forage())),
            DomainKind::TwoRooms => (Environment::two_rooms(), None),
        }
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    /// Serialize to the sectioned plain-text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("[walls]\n");
        for w in &self.walls {
            writeln!(out, "{} {} {} {}", w.a.x, w.a.y, w.b.x, w.b.y).unwrap();
        }
        out.push_str("[waypoints]\n");
        for p in &self.waypoints {
            writeln!(out, "{} {}", p.x, p.y).unwrap();
        }
        out.push_str("[breadcrumbs]\n");
        for p in &self.breadcrumbs {
            writeln!(out, "{} {}", p.x, p.y).unwrap();
        }
        out.push_str("[regions]\n");
        for r in &self.regions {
            write!(out, "{}", r.name).unwrap();
            for p in &r.polygon {
                write!(out, " {} {}", p.x, p.y).unwrap();
            }
            out.push('\n');
        }
        out.push_str("[starts]\n");
        for s in &self.starts {
            writeln!(out, "{} {} {}", s.position.x, s.position.y, s.heading).unwrap();
        }
        out.push_str("[meta]\n");
        writeln!(out, "max_distance {}", self.max_distance).unwrap();
        out
    }

    pub fn from_text(text: &str) -> Result<Environment> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Walls,
            Waypoints,
            Breadcrumbs,
            Regions,
            Starts,
            Meta,
        }
        let mut section = Section::None;
        let mut walls = Vec::new();
        let mut waypoints = Vec::new();
        let mut breadcrumbs = Vec::new();
        let mut regions = Vec::new();
        let mut starts = Vec::new();
        let mut max_distance: Option<f64> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[walls]" => section = Section::Walls,
                "[waypoints]" => section = Section::Waypoints,
                "[breadcrumbs]" => section = Section::Breadcrumbs,
                "[regions]" => section = Section::Regions,
                "[starts]" => section = Section::Starts,
                "[meta]" => section = Section::Meta,
                _ => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    let floats = |expected: usize| -> Result<Vec<f64>> {
                        if fields.len() != expected {
                            return Err(Error::parse(
                                line_no,
                                format!("expected {expected} fields, found {}", fields.len()),
                            ));
                        }
                        fields
                            .iter()
                            .map(|f| {
                                f.parse::<f64>().map_err(|_| {
                                    Error::parse(line_no, format!("invalid number `{f}`"))
                                })
                            })
                            .collect()
                    };
                    match section {
                        Section::None => {
                            return Err(Error::parse(line_no, "record before any section header"))
                        }
                        Section::Walls => {
                            let v = floats(4)?;
                            walls.push(Segment::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3])));
                        }
                        Section::Waypoints => {
                            let v = floats(2)?;
                            waypoints.push(Vec2::new(v[0], v[1]));
                        }
                        Section::Breadcrumbs => {
                            let v = floats(2)?;
                            breadcrumbs.push(Vec2::new(v[0], v[1]));
                        }
                        Section::Regions => {
                            if fields.len() < 7 || fields.len() % 2 == 0 {
                                return Err(Error::parse(
                                    line_no,
                                    "region needs a name plus at least 3 x y vertex pairs",
                                ));
                            }
                            let name = fields[0].to_string();
                            let mut polygon = Vec::new();
                            for pair in fields[1..].chunks(2) {
                                let x = pair[0].parse::<f64>().map_err(|_| {
                                    Error::parse(line_no, format!("invalid number `{}`", pair[0]))
                                })?;
                                let y = pair[1].parse::<f64>().map_err(|_| {
                                    Error::parse(line_no, format!("invalid number `{}`", pair[1]))
                                })?;
                                polygon.push(Vec2::new(x, y));
                            }
                            regions.push(Region { name, polygon });
                        }
                        Section::Starts => {
                            let v = floats(3)?;
                            starts.push(StartPose {
                                position: Vec2::new(v[0], v[1]),
                                heading: v[2],
                            });
                        }
                        Section::Meta => {
                            if fields.len() == 2 && fields[0] == "max_distance" {
                                max_distance = Some(fields[1].parse().map_err(|_| {
                                    Error::parse(line_no, format!("invalid number `{}`", fields[1]))
                                })?);
                            } else {
                                return Err(Error::parse(
                                    line_no,
                                    format!("unknown meta record `{}`", fields[0]),
                                ));
                            }
                        }
                    }
                }
            }
        }

        if walls.is_empty() {
            return Err(Error::parse(1, "environment has no walls"));
        }
        if starts.is_empty() {
            return Err(Error::parse(1, "environment has no start poses"));
        }
        let max_distance = max_distance.unwrap_or_else(|| bounding_box_diagonal(&walls));
        Ok(Environment {
            walls,
            waypoints,
            breadcrumbs,
            regions,
            starts,
            max_distance,
        })
    }

    pub fn from_file(path: &Path) -> Result<Environment> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Environment::from_text(&text)
    }
}
