//! A small task grammar: random task generation, rendering to English,
//! recovery of the action sequence from English, and program emission.

use std::fmt::Write;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compass {
    North,
    East,
    South,
    West,
}

impl Compass {
    const ALL: [Compass; 4] = [Compass::North, Compass::East, Compass::South, Compass::West];

    fn word(self) -> &'static str {
        match self {
            Compass::North => "north",
            Compass::East => "east",
            Compass::South => "south",
            Compass::West => "west",
        }
    }

    fn heading(self) -> i32 {
        match self {
            Compass::North => 0,
            Compass::East => 90,
            Compass::South => 180,
            Compass::West => -90,
        }
    }

    fn from_word(w: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.word() == w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyDir {
    Forward,
    Backward,
    Left,
    Right,
}

impl BodyDir {
    const ALL: [BodyDir; 4] = [BodyDir::Forward, BodyDir::Backward, BodyDir::Left, BodyDir::Right];

    fn word(self) -> &'static str {
        match self {
            BodyDir::Forward => "forward",
            BodyDir::Backward => "backward",
            BodyDir::Left => "left",
            BodyDir::Right => "right",
        }
    }

    fn from_word(w: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.word() == w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Yz,
    Xz,
}

/// One primitive action of a simple task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Vertical { up: bool, d: u32 },
    World { dir: Compass, d: u32 },
    Body { dir: BodyDir, d: u32 },
    Rotate { clockwise: bool, deg: u32 },
    Face(Compass),
    /// Diagonal move in a vertical body-frame plane. `positive` is right (YZ)
    /// or front (XZ).
    Slant { plane: Plane, top: bool, positive: bool, angle: u32, d: u32 },
}

fn distance<R: Rng>(rng: &mut R) -> u32 {
    rng.gen_range(3..=9)
}

fn random_action<R: Rng>(rng: &mut R) -> Action {
    match rng.gen_range(0..10) {
        0 | 1 => Action::Vertical { up: rng.gen_bool(0.6), d: distance(rng) },
        2 | 3 => Action::World { dir: *Compass::ALL.choose(rng).unwrap(), d: distance(rng) },
        4..=6 => Action::Body { dir: *BodyDir::ALL.choose(rng).unwrap(), d: distance(rng) },
        7 | 8 => Action::Rotate { clockwise: rng.gen_bool(0.5), deg: 30 * rng.gen_range(1..=6) },
        _ => Action::Face(*Compass::ALL.choose(rng).unwrap()),
    }
}

fn random_slant<R: Rng>(rng: &mut R) -> Action {
    Action::Slant {
        plane: if rng.gen_bool(0.5) { Plane::Yz } else { Plane::Xz },
        top: rng.gen_bool(0.6),
        positive: rng.gen_bool(0.5),
        angle: if rng.gen_bool(0.5) { 30 } else { 60 },
        d: distance(rng),
    }
}

/// A task of one to three primitive actions.
pub fn random_plain<R: Rng>(rng: &mut R) -> Vec<Action> {
    let n = rng.gen_range(1..=3);
    let mut actions: Vec<Action> = Vec::with_capacity(n);
    while actions.len() < n {
        let a = random_action(rng);
        if actions.last().is_some_and(|prev| std::mem::discriminant(prev) == std::mem::discriminant(&a)) {
            continue;
        }
        actions.push(a);
    }
    actions
}

/// A diagonal-plane task, sometimes preceded by a heading change.
pub fn random_plane_task<R: Rng>(rng: &mut R) -> Vec<Action> {
    let mut actions = Vec::new();
    match rng.gen_range(0..3) {
        0 => actions.push(Action::Rotate { clockwise: rng.gen_bool(0.5), deg: 30 * rng.gen_range(1..=6) }),
        1 => actions.push(Action::Face(*Compass::ALL.choose(rng).unwrap())),
        _ => {}
    }
    actions.push(random_slant(rng));
    actions
}

fn slant_words(plane: Plane, top: bool, positive: bool) -> (&'static str, &'static str, &'static str) {
    let v = if top { "top" } else { "bottom" };
    let h = match (plane, positive) {
        (Plane::Yz, true) => "right",
        (Plane::Yz, false) => "left",
        (Plane::Xz, true) => "front",
        (Plane::Xz, false) => "back",
    };
    let p = if plane == Plane::Yz { "YZ" } else { "XZ" };
    (v, h, p)
}

/// Wording used in generated tasks.
pub fn render_clause<R: Rng>(a: &Action, rng: &mut R) -> String {
    match *a {
        Action::Vertical { up: true, d } if rng.gen_bool(0.5) => format!("ascend {d} meters in the world frame"),
        Action::Vertical { up: false, d } if rng.gen_bool(0.5) => format!("descend {d} meters in the world frame"),
        Action::Vertical { up, d } => format!("fly {d} meters {} in the world frame", if up { "up" } else { "down" }),
        Action::World { dir, d } => format!("fly {d} meters {} in the world frame", dir.word()),
        Action::Body { dir, d } => format!("fly {d} meters {} in the drone's body frame", dir.word()),
        Action::Rotate { clockwise, deg } => {
            let verb = if rng.gen_bool(0.5) { "rotate" } else { "turn" };
            format!("{verb} {deg} degrees {}", if clockwise { "clockwise" } else { "counterclockwise" })
        }
        Action::Face(c) => format!("turn to face the local {}", c.word()),
        Action::Slant { plane, top, positive, angle, d } => {
            let (v, h, p) = slant_words(plane, top, positive);
            format!(
                "fly the drone in the {v}-{h} direction at an angle of {angle} degrees from the horizontal axis, in the {p} plane of the drone's body frame for a distance of {d} meters"
            )
        }
    }
}

/// Alternative wording used when rewriting a task.
pub fn restate_clause<R: Rng>(a: &Action, rng: &mut R) -> String {
    let alt = rng.gen_bool(0.5);
    match *a {
        Action::Vertical { up: true, d } if alt => format!("in the world frame, ascend {d} meters"),
        Action::Vertical { up: true, d } => format!("climb {d} meters in the world frame"),
        Action::Vertical { up: false, d } if alt => format!("in the world frame, drop {d} meters"),
        Action::Vertical { up: false, d } => format!("descend {d} meters in the world frame"),
        Action::World { dir, d } if alt => format!("in the world frame, travel {d} meters {}", dir.word()),
        Action::World { dir, d } => format!("move {d} meters {} in the world frame", dir.word()),
        Action::Body { dir, d } if alt => format!("in the drone's body frame, go {d} meters {}", dir.word()),
        Action::Body { dir, d } => format!("move {d} meters {} in the drone's body frame", dir.word()),
        Action::Rotate { clockwise, deg } => {
            let dir = if clockwise { "clockwise" } else { "counterclockwise" };
            if alt {
                format!("yaw {deg} degrees {dir}")
            } else {
                format!("rotate {deg} degrees {dir} in place")
            }
        }
        Action::Face(c) => format!("turn to face the local {} before moving on", c.word()),
        Action::Slant { plane, top, positive, angle, d } => {
            let (v, h, p) = slant_words(plane, top, positive);
            format!(
                "move in the {v}-{h} direction at an angle of {angle} degrees from the horizontal axis, in the {p} plane of the drone's body frame for a distance of {d} meters"
            )
        }
    }
}

pub fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Joins clauses into one sentence.
pub fn sentence(clauses: &[String]) -> String {
    format!("{}.", capitalize(&clauses.join(", then ")))
}

static SLANT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(top|bottom)-(right|left|front|back) direction at an angle of (\d+) degrees from the horizontal axis,? in the (yz|xz) plane of the drone's body frame for a distance of (\d+) meters?").unwrap()
});
static FACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bface the local (north|east|south|west)\b").unwrap());
static ROTATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:rotate|turn|yaw)\s+(?:by\s+)?(\d+)\s+degrees(?:\s+(clockwise|counterclockwise|counter-clockwise|anticlockwise))?").unwrap()
});
static MOVE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(\d+)\s+meters?\s+(up|down|north|east|south|west|forward|backward|left|right)\b").unwrap()
});
static CLIMB: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(ascend|climb|rise|descend|drop|lower)\s+(\d+)\s+meters?\b").unwrap());

/// Recovers the primitive actions named in `text`, in order of appearance.
pub fn parse_actions(text: &str) -> Vec<Action> {
    let mut found: Vec<(usize, usize, Action)> = Vec::new();
    let free = |found: &[(usize, usize, Action)], s: usize, e: usize| found.iter().all(|&(a, b, _)| e <= a || s >= b);
    let num = |s: &str| s.parse::<u32>().unwrap_or(0);

    for c in SLANT.captures_iter(text) {
        let m = c.get(0).unwrap();
        let plane = if c[4].eq_ignore_ascii_case("yz") { Plane::Yz } else { Plane::Xz };
        let side = c[2].to_lowercase();
        let action = Action::Slant {
            plane,
            top: c[1].eq_ignore_ascii_case("top"),
            positive: side == "right" || side == "front",
            angle: num(&c[3]),
            d: num(&c[5]),
        };
        found.push((m.start(), m.end(), action));
    }
    for c in FACE.captures_iter(text) {
        let m = c.get(0).unwrap();
        if free(&found, m.start(), m.end()) {
            found.push((m.start(), m.end(), Action::Face(Compass::from_word(&c[1].to_lowercase()).unwrap())));
        }
    }
    for c in ROTATE.captures_iter(text) {
        let m = c.get(0).unwrap();
        if free(&found, m.start(), m.end()) {
            let clockwise = c.get(2).is_none_or(|d| d.as_str().eq_ignore_ascii_case("clockwise"));
            found.push((m.start(), m.end(), Action::Rotate { clockwise, deg: num(&c[1]) }));
        }
    }
    for c in MOVE.captures_iter(text) {
        let m = c.get(0).unwrap();
        if !free(&found, m.start(), m.end()) {
            continue;
        }
        let d = num(&c[1]);
        let word = c[2].to_lowercase();
        let action = match word.as_str() {
            "up" => Action::Vertical { up: true, d },
            "down" => Action::Vertical { up: false, d },
            w => match Compass::from_word(w) {
                Some(dir) => Action::World { dir, d },
                None => Action::Body { dir: BodyDir::from_word(w).unwrap(), d },
            },
        };
        found.push((m.start(), m.end(), action));
    }
    for c in CLIMB.captures_iter(text) {
        let m = c.get(0).unwrap();
        if free(&found, m.start(), m.end()) {
            let up = matches!(c[1].to_lowercase().as_str(), "ascend" | "climb" | "rise");
            found.push((m.start(), m.end(), Action::Vertical { up, d: num(&c[2]) }));
        }
    }
    found.sort_by_key(|&(s, _, _)| s);
    found.into_iter().map(|(_, _, a)| a).collect()
}

fn describe(a: &Action) -> String {
    match *a {
        Action::Vertical { up, d } => format!("{} {d} m", if up { "Climb" } else { "Descend" }),
        Action::World { dir, d } => format!("{d} m {} in the world frame", dir.word()),
        Action::Body { dir, d } => format!("{d} m {} in the body frame", dir.word()),
        Action::Rotate { clockwise, deg } => {
            format!("Rotate {deg} degrees {}", if clockwise { "clockwise" } else { "counterclockwise" })
        }
        Action::Face(c) => format!("Face {}", c.word()),
        Action::Slant { plane, angle, d, .. } => {
            format!("{d} m along a {angle} degree diagonal in the {} plane", if plane == Plane::Yz { "YZ" } else { "XZ" })
        }
    }
}

/// Program for a simple task. With `slip`, the first position query binds
/// the wrong name, the kind of mistake a model makes on a first attempt.
pub fn simple_program(actions: &[Action], slip: bool) -> String {
    let mut out = String::from("aw.takeoff()\n");
    let mut slipped = !slip;
    let mut pos = |out: &mut String| {
        let name = if slipped { "p" } else { "pos" };
        slipped = true;
        let _ = writeln!(out, "{name} = aw.get_drone_position()");
    };
    for a in actions {
        let _ = writeln!(out, "# {}", describe(a));
        match *a {
            Action::Vertical { up, d } => {
                pos(&mut out);
                let op = if up { '-' } else { '+' };
                let _ = writeln!(out, "aw.fly_to([p[0], p[1], p[2] {op} {d}])");
            }
            Action::World { dir, d } => {
                pos(&mut out);
                let target = match dir {
                    Compass::North => format!("p[0] + {d}, p[1]"),
                    Compass::South => format!("p[0] - {d}, p[1]"),
                    Compass::East => format!("p[0], p[1] + {d}"),
                    Compass::West => format!("p[0], p[1] - {d}"),
                };
                let _ = writeln!(out, "aw.fly_to([{target}, p[2]])");
            }
            Action::Body { dir, d } => {
                out.push_str("yaw = radians(aw.get_yaw())\n");
                pos(&mut out);
                let target = match dir {
                    BodyDir::Forward => format!("p[0] + {d} * cos(yaw), p[1] + {d} * sin(yaw)"),
                    BodyDir::Backward => format!("p[0] - {d} * cos(yaw), p[1] - {d} * sin(yaw)"),
                    BodyDir::Right => format!("p[0] - {d} * sin(yaw), p[1] + {d} * cos(yaw)"),
                    BodyDir::Left => format!("p[0] + {d} * sin(yaw), p[1] - {d} * cos(yaw)"),
                };
                let _ = writeln!(out, "aw.fly_to([{target}, p[2]])");
            }
            Action::Rotate { clockwise, deg } => {
                let op = if clockwise { '+' } else { '-' };
                let _ = writeln!(out, "aw.set_yaw(aw.get_yaw() {op} {deg})");
            }
            Action::Face(c) => {
                let _ = writeln!(out, "aw.set_yaw({})", c.heading());
            }
            Action::Slant { plane, top, positive, angle, d } => {
                out.push_str("yaw = radians(aw.get_yaw())\n");
                pos(&mut out);
                let _ = writeln!(out, "h = {d} * cos(radians({angle}))");
                let _ = writeln!(out, "v = {d} * sin(radians({angle}))");
                let horizontal = match (plane, positive) {
                    (Plane::Yz, true) => "p[0] - h * sin(yaw), p[1] + h * cos(yaw)",
                    (Plane::Yz, false) => "p[0] + h * sin(yaw), p[1] - h * cos(yaw)",
                    (Plane::Xz, true) => "p[0] + h * cos(yaw), p[1] + h * sin(yaw)",
                    (Plane::Xz, false) => "p[0] - h * cos(yaw), p[1] - h * sin(yaw)",
                };
                let op = if top { '-' } else { '+' };
                let _ = writeln!(out, "aw.fly_to([{horizontal}, p[2] {op} v])");
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Keep,
    Along,
    Perpendicular,
    Opposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    None,
    Repeat(u32),
    Reverse(u32),
    Shift(Compass, u32),
}

/// A square-pattern task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarePlan {
    pub climb: u32,
    pub side: u32,
    /// Side directions in degrees, relative to north (world) or to the
    /// starting heading (body).
    pub legs: [u32; 4],
    pub body: bool,
    pub examine: bool,
    pub orientation: Orientation,
    pub extension: Extension,
}

fn leg_word(offset: u32, body: bool) -> &'static str {
    match (offset % 360, body) {
        (0, false) => "north",
        (90, false) => "east",
        (180, false) => "south",
        (270, false) => "west",
        (0, true) => "forward",
        (90, true) => "right",
        (180, true) => "backward",
        _ => "left",
    }
}

fn leg_offset(word: &str) -> Option<(u32, bool)> {
    Some(match word {
        "north" => (0, false),
        "east" => (90, false),
        "south" => (180, false),
        "west" => (270, false),
        "forward" => (0, true),
        "right" => (90, true),
        "backward" => (180, true),
        "left" => (270, true),
        _ => return None,
    })
}

pub fn random_square<R: Rng>(rng: &mut R) -> SquarePlan {
    let start = rng.gen_range(0..4u32);
    let clockwise = rng.gen_bool(0.5);
    let mut legs = [0u32; 4];
    for (i, leg) in legs.iter_mut().enumerate() {
        let step = if clockwise { i as u32 } else { 4 - i as u32 };
        *leg = ((start + step) % 4) * 90;
    }
    let orientation = *[Orientation::Keep, Orientation::Along, Orientation::Perpendicular, Orientation::Opposite]
        .choose(rng)
        .unwrap();
    let extension = match rng.gen_range(0..4) {
        0 => Extension::None,
        1 => Extension::Repeat(rng.gen_range(2..=3)),
        2 => Extension::Reverse(distance(rng)),
        _ => Extension::Shift(*Compass::ALL.choose(rng).unwrap(), distance(rng)),
    };
    SquarePlan {
        climb: distance(rng),
        side: distance(rng),
        legs,
        body: rng.gen_bool(0.5),
        examine: rng.gen_bool(0.5),
        orientation,
        extension,
    }
}

fn count_word(n: u32) -> &'static str {
    match n {
        2 => "two",
        3 => "three",
        4 => "four",
        _ => "several",
    }
}

pub fn render_square(plan: &SquarePlan) -> String {
    let mut s = format!("Take off and fly up {} meters.", plan.climb);
    if plan.examine {
        s.push_str(" You will examine a square area.");
    }
    let w: Vec<&str> = plan.legs.iter().map(|&l| leg_word(l, plan.body)).collect();
    let frame = if plan.body { "the drone's body frame" } else { "the world axis" };
    let _ = write!(
        s,
        " You should fly in a square pattern with {}-meter sides by moving {}, {}, {}, and {} in {frame}.",
        plan.side, w[0], w[1], w[2], w[3]
    );
    s.push_str(match plan.orientation {
        Orientation::Keep => " Keep the drone's heading unchanged throughout.",
        Orientation::Along => " The drone should stay oriented in the flying direction on each side of the square.",
        Orientation::Perpendicular => {
            " To examine the square area, the drone should orientate perpendicular to the moving direction on each side of the square."
        }
        Orientation::Opposite => " The drone should point opposite to the moving direction on each side of the square.",
    });
    match plan.extension {
        Extension::None => {}
        Extension::Repeat(n) => {
            let _ = write!(s, " Fly the pattern {} times in total.", count_word(n));
        }
        Extension::Reverse(h) => {
            let _ = write!(
                s,
                " Next, ascend another {h} meters and fly the square pattern in reverse order to examine the same area."
            );
        }
        Extension::Shift(c, k) => {
            let _ = write!(s, " Then shift {k} meters {} in the world frame and fly the same square again.", c.word());
        }
    }
    s
}

static SQ_CLIMB: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bfly up (\d+) meters?").unwrap());
static SQ_SIDE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(\d+)-meter sides?").unwrap());
static SQ_LEGS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bmoving (\w+), (\w+), (\w+),? and (\w+)").unwrap());
static SQ_REPEAT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(two|three|four) times in total").unwrap());
static SQ_REVERSE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\bascend another (\d+) meters? and fly the square pattern in reverse order").unwrap()
});
static SQ_SHIFT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bshift (\d+) meters? (north|east|south|west)\b").unwrap());

pub fn is_square_task(text: &str) -> bool {
    text.to_lowercase().contains("square pattern")
}

/// Recovers a square plan from its description.
pub fn parse_square(text: &str) -> Option<SquarePlan> {
    let lower = text.to_lowercase();
    let num = |re: &Regex| re.captures(text).and_then(|c| c[1].parse::<u32>().ok());
    let legs_cap = SQ_LEGS.captures(&lower)?;
    let mut legs = [0u32; 4];
    let mut body = false;
    for i in 0..4 {
        let (off, b) = leg_offset(&legs_cap[i + 1])?;
        legs[i] = off;
        body = b;
    }
    let orientation = if lower.contains("oriented in the flying direction") {
        Orientation::Along
    } else if lower.contains("perpendicular to the moving direction") {
        Orientation::Perpendicular
    } else if lower.contains("opposite to the moving direction") {
        Orientation::Opposite
    } else {
        Orientation::Keep
    };
    let extension = if let Some(c) = SQ_REPEAT.captures(&lower) {
        Extension::Repeat(match &c[1] {
            "two" => 2,
            "three" => 3,
            _ => 4,
        })
    } else if let Some(h) = num(&SQ_REVERSE) {
        Extension::Reverse(h)
    } else if let Some(c) = SQ_SHIFT.captures(&lower) {
        Extension::Shift(Compass::from_word(&c[2])?, c[1].parse().ok()?)
    } else {
        Extension::None
    };
    Some(SquarePlan {
        climb: num(&SQ_CLIMB)?,
        side: num(&SQ_SIDE)?,
        legs,
        body,
        examine: lower.contains("examine a square area"),
        orientation,
        extension,
    })
}

fn square_loop(out: &mut String, list: &str, orientation: Orientation, indent: &str) {
    let _ = writeln!(out, "{indent}for i in range(4):");
    let _ = writeln!(out, "{indent}    heading = base + {list}[i]");
    match orientation {
        Orientation::Keep => {}
        Orientation::Along => {
            let _ = writeln!(out, "{indent}    aw.set_yaw(heading)");
        }
        Orientation::Perpendicular => {
            let _ = writeln!(out, "{indent}    aw.set_yaw(heading + 90)");
        }
        Orientation::Opposite => {
            let _ = writeln!(out, "{indent}    aw.set_yaw(heading + 180)");
        }
    }
    let _ = writeln!(out, "{indent}    p = aw.get_drone_position()");
    let _ = writeln!(
        out,
        "{indent}    aw.fly_to([p[0] + side * cos(radians(heading)), p[1] + side * sin(radians(heading)), p[2]])"
    );
}

fn list_text(legs: &[u32; 4]) -> String {
    format!("[{}, {}, {}, {}]", legs[0], legs[1], legs[2], legs[3])
}

pub fn square_program(plan: &SquarePlan, slip: bool) -> String {
    let mut out = String::from("aw.takeoff()\n# Climb to the working altitude\n");
    let _ = writeln!(out, "{} = aw.get_drone_position()", if slip { "pos" } else { "p" });
    let _ = writeln!(out, "aw.fly_to([p[0], p[1], p[2] - {}])", plan.climb);
    let _ = writeln!(out, "side = {}", plan.side);
    if plan.body {
        out.push_str("# Side directions relative to the starting heading\nbase = aw.get_yaw()\n");
    } else {
        out.push_str("# Compass heading of each side\nbase = 0\n");
    }
    let _ = writeln!(out, "legs = {}", list_text(&plan.legs));
    match plan.extension {
        Extension::Repeat(n) => {
            let _ = writeln!(out, "for k in range({n}):");
            square_loop(&mut out, "legs", plan.orientation, "    ");
        }
        _ => square_loop(&mut out, "legs", plan.orientation, ""),
    }
    match plan.extension {
        Extension::None | Extension::Repeat(_) => {}
        Extension::Reverse(h) => {
            out.push_str("# Climb again and retrace the square backwards\np = aw.get_drone_position()\n");
            let _ = writeln!(out, "aw.fly_to([p[0], p[1], p[2] - {h}])");
            let mut back = plan.legs;
            back.reverse();
            for b in back.iter_mut() {
                *b = (*b + 180) % 360;
            }
            let _ = writeln!(out, "back = {}", list_text(&back));
            square_loop(&mut out, "back", plan.orientation, "");
        }
        Extension::Shift(c, k) => {
            out.push_str("# Shift over and fly the same square again\np = aw.get_drone_position()\n");
            let target = match c {
                Compass::North => format!("p[0] + {k}, p[1]"),
                Compass::South => format!("p[0] - {k}, p[1]"),
                Compass::East => format!("p[0], p[1] + {k}"),
                Compass::West => format!("p[0], p[1] - {k}"),
            };
            let _ = writeln!(out, "aw.fly_to([{target}, p[2]])");
            square_loop(&mut out, "legs", plan.orientation, "");
        }
    }
    out
}

/// Program for any task text this grammar understands.
pub fn translate(text: &str, slip: bool) -> String {
    if is_square_task(text) {
        if let Some(plan) = parse_square(text) {
            return square_program(&plan, slip);
        }
    }
    simple_program(&parse_actions(text), slip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use roboground_core::dsl::{run_source, Limits};
    use roboground_core::RobotProfile;
    use std::sync::Arc;

    fn run(code: &str) -> roboground_core::Trajectory {
        run_source(code, Arc::new(RobotProfile::uav()), Limits::default()).unwrap()
    }

    #[test]
    fn rendered_tasks_parse_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..500 {
            let actions = if i % 4 == 0 { random_plane_task(&mut rng) } else { random_plain(&mut rng) };
            let text = sentence(&actions.iter().map(|a| render_clause(a, &mut rng)).collect::<Vec<_>>());
            assert_eq!(parse_actions(&text), actions, "{text}");
            let restated = sentence(&actions.iter().map(|a| restate_clause(a, &mut rng)).collect::<Vec<_>>());
            assert_eq!(parse_actions(&restated), actions, "{restated}");
        }
    }

    #[test]
    fn squares_parse_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let plan = random_square(&mut rng);
            let text = render_square(&plan);
            assert!(is_square_task(&text));
            assert_eq!(parse_square(&text), Some(plan), "{text}");
        }
    }

    #[test]
    fn programs_run_and_slip_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let actions = random_plain(&mut rng);
            let t = run(&simple_program(&actions, false));
            assert_eq!(t.transitions.len(), actions.len() + 1);
            let plan = random_square(&mut rng);
            run(&square_program(&plan, false));
            assert!(run_source::<f64>(&square_program(&plan, true), Arc::new(RobotProfile::uav()), Limits::default())
                .is_err());
        }
    }

    #[test]
    fn prompt_examples_translate() {
        let t = run(&translate("Fly 3 meters up, then fly 5 meters down in the world frame.", false));
        let dz: Vec<f64> = t.transitions[1..].iter().map(|t| t.dz).collect();
        assert_eq!(dz, vec![-3.0, 5.0]);
        let t = run(&translate(
            "Fly the drone in the top-right direction at an angle of 60 degrees from the horizontal axis, in the YZ plane of the drone's body frame for a distance of 5 meters.",
            false,
        ));
        let last = t.transitions.last().unwrap();
        assert!((last.dy - 2.5).abs() < 1e-9 && (last.dz + 75f64.sqrt() / 2.0).abs() < 1e-9 && last.dx.abs() < 1e-9);
        let t = run(&translate("Turn to face the local south, then fly 6 meters forward in the drone's body frame.", false));
        let last = t.transitions.last().unwrap();
        assert!((last.dx + 6.0).abs() < 1e-9 && last.dy.abs() < 1e-9);
    }

    #[test]
    fn square_closes() {
        let plan = SquarePlan {
            climb: 5,
            side: 5,
            legs: [0, 90, 180, 270],
            body: false,
            examine: false,
            orientation: Orientation::Perpendicular,
            extension: Extension::Reverse(4),
        };
        let t = run(&square_program(&plan, false));
        assert!(t.final_pose.north.abs() < 1e-9 && t.final_pose.east.abs() < 1e-9);
        assert!((t.final_pose.down + 9.0).abs() < 1e-9);
    }
}
