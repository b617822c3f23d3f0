//! Lexer and recursive-descent parser for the scenario format.

use super::{
    validate, AgentSpec, Diagnostic, DiagnosticKind, ObstacleSpec, Pos, Positions, Scenario,
};
use crate::geometry::{Point, Rect};
use crate::path::GoalArea;
use crate::sign::{CausalRelation, Feature, Operator, Sign};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Ident(String),
    Str(String),
    Num(f64),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::LBracket => write!(f, "'['"),
            Tok::RBracket => write!(f, "']'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::Colon => write!(f, "':'"),
            Tok::Comma => write!(f, "','"),
            Tok::Ident(s) => write!(f, "identifier {s:?}"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Num(n) => write!(f, "number {n}"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    i: usize,
    line: usize,
    col: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Diagnostic {
    Diagnostic { line: pos.line, col: pos.col, kind: DiagnosticKind::Syntax, message: message.into() }
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), i: 0, line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.src.get(self.i).copied()?;
        self.i += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.i).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            while let Some(b) = self.peek() {
                if b == b'#' {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if b.is_ascii_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let pos = self.pos();
            let Some(b) = self.peek() else { break };
            let tok = match b {
                b'{' => {
                    self.bump();
                    Tok::LBrace
                }
                b'}' => {
                    self.bump();
                    Tok::RBrace
                }
                b'[' => {
                    self.bump();
                    Tok::LBracket
                }
                b']' => {
                    self.bump();
                    Tok::RBracket
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b':' => {
                    self.bump();
                    Tok::Colon
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some(b'"') => break,
                            Some(b'\\') => match self.bump() {
                                Some(b'"') => s.push('"'),
                                Some(b'\\') => s.push('\\'),
                                Some(other) => {
                                    return Err(syntax(
                                        pos,
                                        format!("unknown escape '\\{}'", other as char),
                                    ))
                                }
                                None => return Err(syntax(pos, "unterminated string")),
                            },
                            Some(other) => s.push(other as char),
                            None => return Err(syntax(pos, "unterminated string")),
                        }
                    }
                    Tok::Str(s)
                }
                b'-' | b'0'..=b'9' => {
                    let start = self.i;
                    self.bump();
                    while let Some(b) = self.peek() {
                        if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || b == b'-' || b == b'+'
                        {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let text = std::str::from_utf8(&self.src[start..self.i]).unwrap();
                    let n: f64 = text
                        .parse()
                        .map_err(|_| syntax(pos, format!("malformed number {text:?}")))?;
                    Tok::Num(n)
                }
                b if b.is_ascii_alphabetic() || b == b'_' => {
                    let start = self.i;
                    self.bump();
                    while let Some(b) = self.peek() {
                        if b.is_ascii_alphanumeric() || b == b'_' {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(std::str::from_utf8(&self.src[start..self.i]).unwrap().to_owned())
                }
                other => {
                    return Err(syntax(pos, format!("unexpected character {:?}", other as char)))
                }
            };
            out.push((tok, pos));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    positions: Positions,
    current_agent: u32,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.i)
            .map(|(_, p)| *p)
            .unwrap_or_else(|| self.toks.last().map(|(_, p)| *p).unwrap_or(Pos { line: 1, col: 1 }))
    }

    fn next(&mut self) -> Result<(Tok, Pos), Diagnostic> {
        let item = self
            .toks
            .get(self.i)
            .cloned()
            .ok_or_else(|| syntax(self.pos(), "unexpected end of file"))?;
        self.i += 1;
        Ok(item)
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, Diagnostic> {
        let (got, pos) = self.next()?;
        if got == tok {
            Ok(pos)
        } else {
            Err(syntax(pos, format!("expected {tok}, found {got}")))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), Diagnostic> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Ident(s) => Ok((s, pos)),
            other => Err(syntax(pos, format!("expected identifier, found {other}"))),
        }
    }

    fn string(&mut self) -> Result<String, Diagnostic> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Str(s) => Ok(s),
            other => Err(syntax(pos, format!("expected string, found {other}"))),
        }
    }

    /// Bare identifier or quoted string; used where names have no spaces.
    fn name(&mut self) -> Result<String, Diagnostic> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Str(s) => Ok(s),
            Tok::Ident(s) => Ok(s),
            other => Err(syntax(pos, format!("expected name, found {other}"))),
        }
    }

    fn number(&mut self) -> Result<f64, Diagnostic> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Num(n) => Ok(n),
            other => Err(syntax(pos, format!("expected number, found {other}"))),
        }
    }

    fn integer<T: TryFrom<i64>>(&mut self) -> Result<T, Diagnostic> {
        let pos = self.pos();
        let n = self.number()?;
        if n.fract() != 0.0 {
            return Err(syntax(pos, format!("expected integer, found {n}")));
        }
        T::try_from(n as i64).map_err(|_| syntax(pos, format!("integer {n} out of range")))
    }

    fn boolean(&mut self) -> Result<bool, Diagnostic> {
        let (name, pos) = self.ident()?;
        match name.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(syntax(pos, format!("expected true or false, found {other:?}"))),
        }
    }

    fn point(&mut self) -> Result<Point, Diagnostic> {
        self.expect(Tok::LParen)?;
        let x = self.number()?;
        self.expect(Tok::Comma)?;
        let y = self.number()?;
        self.expect(Tok::RParen)?;
        Ok(Point::new(x, y))
    }

    fn goal_area_block(&mut self) -> Result<GoalArea, Diagnostic> {
        self.expect(Tok::LBrace)?;
        let mut cp = None;
        let mut r_g = None;
        while !self.eat(&Tok::RBrace) {
            let (key, pos) = self.ident()?;
            self.expect(Tok::Colon)?;
            match key.as_str() {
                "cp" => cp = Some(self.point()?),
                "r_g" => r_g = Some(self.number()?),
                other => return Err(syntax(pos, format!("unknown goal-area key {other:?}"))),
            }
        }
        let pos = self.pos();
        Ok(GoalArea {
            cp: cp.ok_or_else(|| syntax(pos, "goal area misses cp"))?,
            r_g: r_g.ok_or_else(|| syntax(pos, "goal area misses r_g"))?,
        })
    }

    /// `[["a", "b"], ["c"]]`
    fn name_groups(&mut self) -> Result<Vec<Vec<String>>, Diagnostic> {
        self.expect(Tok::LBracket)?;
        let mut groups = Vec::new();
        while !self.eat(&Tok::RBracket) {
            self.expect(Tok::LBracket)?;
            let mut group = Vec::new();
            while !self.eat(&Tok::RBracket) {
                group.push(self.string()?);
                self.eat(&Tok::Comma);
            }
            groups.push(group);
            self.eat(&Tok::Comma);
        }
        Ok(groups)
    }

    fn feature(&mut self) -> Result<Feature, Diagnostic> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Str(name) => Ok(Feature::SignLink { name }),
            Tok::Ident(kind) => {
                self.expect(Tok::LParen)?;
                let feature = match kind.as_str() {
                    "sensor" => {
                        let (channel, _) = self.ident()?;
                        self.expect(Tok::Comma)?;
                        let value = self.name()?;
                        Feature::SensorDatum { channel, value }
                    }
                    "personal" => Feature::PersonalFeature { property: self.name()? },
                    "relocate" => Feature::Operator(Operator::Relocate { place: self.string()? }),
                    "destroy" => {
                        Feature::Operator(Operator::Destroy { obstacle_sign: self.string()? })
                    }
                    other => return Err(syntax(pos, format!("unknown feature kind {other:?}"))),
                };
                self.expect(Tok::RParen)?;
                Ok(feature)
            }
            other => Err(syntax(pos, format!("expected feature, found {other}"))),
        }
    }

    fn feature_groups(&mut self) -> Result<Vec<Vec<Feature>>, Diagnostic> {
        self.expect(Tok::LBracket)?;
        let mut groups = Vec::new();
        while !self.eat(&Tok::RBracket) {
            self.expect(Tok::LBracket)?;
            let mut group = Vec::new();
            while !self.eat(&Tok::RBracket) {
                group.push(self.feature()?);
                self.eat(&Tok::Comma);
            }
            groups.push(group);
            self.eat(&Tok::Comma);
        }
        Ok(groups)
    }

    fn relation(&mut self) -> Result<CausalRelation, Diagnostic> {
        let label = self.string()?;
        self.expect(Tok::LBrace)?;
        let mut conditions = Vec::new();
        let mut effects = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (key, pos) = self.ident()?;
            self.expect(Tok::Colon)?;
            match key.as_str() {
                "conditions" => conditions = self.feature_groups()?,
                "effects" => effects = self.feature_groups()?,
                other => return Err(syntax(pos, format!("unknown relation key {other:?}"))),
            }
        }
        Ok(CausalRelation { label, conditions, effects })
    }

    fn sign(&mut self, agent: u32) -> Result<Sign, Diagnostic> {
        let pos = self.pos();
        let name = self.string()?;
        self.positions.signs.insert((agent, name.clone()), pos);
        self.expect(Tok::LBrace)?;
        let mut sign = Sign::named(name);
        while !self.eat(&Tok::RBrace) {
            let (key, pos) = self.ident()?;
            match key.as_str() {
                "image" => {
                    self.expect(Tok::Colon)?;
                    sign.image = self.feature_groups()?;
                }
                "significance" => sign.significance.push(self.relation()?),
                "meaning" => sign.meaning.push(self.relation()?),
                "links" => {
                    self.expect(Tok::LBrace)?;
                    while !self.eat(&Tok::RBrace) {
                        let key: usize = self.integer()?;
                        self.expect(Tok::Colon)?;
                        self.expect(Tok::LBracket)?;
                        let mut targets = Vec::new();
                        while !self.eat(&Tok::RBracket) {
                            targets.push(self.integer()?);
                            self.eat(&Tok::Comma);
                        }
                        sign.links.insert(key, targets);
                    }
                }
                other => return Err(syntax(pos, format!("unknown sign key {other:?}"))),
            }
        }
        Ok(sign)
    }

    fn world(&mut self, scenario: &mut Scenario) -> Result<(), Diagnostic> {
        self.positions.world = Some(self.pos());
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let (key, pos) = self.ident()?;
            match key.as_str() {
                "bounds" => {
                    self.expect(Tok::LBrace)?;
                    let mut bounds = Rect::new(0.0, 0.0, 0.0, 0.0);
                    while !self.eat(&Tok::RBrace) {
                        let (key, pos) = self.ident()?;
                        self.expect(Tok::Colon)?;
                        let value = self.number()?;
                        match key.as_str() {
                            "x_min" => bounds.x_min = value,
                            "x_max" => bounds.x_max = value,
                            "y_min" => bounds.y_min = value,
                            "y_max" => bounds.y_max = value,
                            other => {
                                return Err(syntax(pos, format!("unknown bounds key {other:?}")))
                            }
                        }
                    }
                    scenario.bounds = bounds;
                }
                "res" => {
                    self.expect(Tok::Colon)?;
                    scenario.res = self.number()?;
                }
                "types" => {
                    self.expect(Tok::LBrace)?;
                    while !self.eat(&Tok::RBrace) {
                        let (ty, _) = self.ident()?;
                        self.expect(Tok::LBrace)?;
                        let mut agents = Vec::new();
                        while !self.eat(&Tok::RBrace) {
                            let (key, pos) = self.ident()?;
                            self.expect(Tok::Colon)?;
                            if key != "destroyable_by" {
                                return Err(syntax(pos, format!("unknown type key {key:?}")));
                            }
                            self.expect(Tok::LBracket)?;
                            while !self.eat(&Tok::RBracket) {
                                agents.push(self.integer()?);
                                self.eat(&Tok::Comma);
                            }
                        }
                        scenario.types.insert(ty, agents);
                    }
                }
                "obstacle" => {
                    let obstacle_pos = pos;
                    self.expect(Tok::LBrace)?;
                    let mut id = None;
                    let mut ty = None;
                    let mut vertices = Vec::new();
                    while !self.eat(&Tok::RBrace) {
                        let (key, pos) = self.ident()?;
                        self.expect(Tok::Colon)?;
                        match key.as_str() {
                            "id" => id = Some(self.integer()?),
                            "type" => ty = Some(self.ident()?.0),
                            "vertices" => {
                                self.expect(Tok::LBracket)?;
                                while !self.eat(&Tok::RBracket) {
                                    vertices.push(self.point()?);
                                    self.eat(&Tok::Comma);
                                }
                            }
                            other => {
                                return Err(syntax(pos, format!("unknown obstacle key {other:?}")))
                            }
                        }
                    }
                    let id = id.ok_or_else(|| syntax(obstacle_pos, "obstacle misses id"))?;
                    self.positions.obstacles.insert(id, obstacle_pos);
                    scenario.obstacles.push(ObstacleSpec {
                        id,
                        obstacle_type: ty
                            .ok_or_else(|| syntax(obstacle_pos, "obstacle misses type"))?,
                        vertices,
                    });
                }
                other => return Err(syntax(pos, format!("unknown world key {other:?}"))),
            }
        }
        Ok(())
    }

    fn agent(&mut self) -> Result<AgentSpec, Diagnostic> {
        let agent_pos = self.pos();
        self.expect(Tok::LBrace)?;
        let mut spec = AgentSpec {
            id: 0,
            self_sign: String::new(),
            public_sign: String::new(),
            position: Point::new(0.0, 0.0),
            radius: 0.5,
            goal_area: GoalArea { cp: Point::new(0.0, 0.0), r_g: 0.0 },
            alpha_max: 180.0,
            alpha_fallback: None,
            step: 5,
            introspection: true,
            start_situation: Vec::new(),
            goal_situation: Vec::new(),
            places: BTreeMap::new(),
            obstacle_signs: BTreeMap::new(),
            channels: BTreeSet::new(),
            signs: Vec::new(),
        };
        let mut saw_id = false;
        while !self.eat(&Tok::RBrace) {
            let (key, pos) = self.ident()?;
            match key.as_str() {
                "id" => {
                    self.expect(Tok::Colon)?;
                    spec.id = self.integer()?;
                    saw_id = true;
                    self.current_agent = spec.id;
                    self.positions.agents.insert(spec.id, agent_pos);
                }
                "self_sign" => {
                    self.expect(Tok::Colon)?;
                    spec.self_sign = self.string()?;
                }
                "public_sign" => {
                    self.expect(Tok::Colon)?;
                    spec.public_sign = self.string()?;
                }
                "position" => {
                    self.expect(Tok::Colon)?;
                    spec.position = self.point()?;
                }
                "radius" => {
                    self.expect(Tok::Colon)?;
                    spec.radius = self.number()?;
                }
                "goal_area" => spec.goal_area = self.goal_area_block()?,
                "alpha_max" => {
                    self.expect(Tok::Colon)?;
                    spec.alpha_max = self.number()?;
                }
                "alpha_fallback" => {
                    self.expect(Tok::Colon)?;
                    spec.alpha_fallback = Some(self.number()?);
                }
                "step" => {
                    self.expect(Tok::Colon)?;
                    spec.step = self.integer()?;
                }
                "introspection" => {
                    self.expect(Tok::Colon)?;
                    spec.introspection = self.boolean()?;
                }
                "start_situation" => {
                    self.expect(Tok::Colon)?;
                    spec.start_situation = self.name_groups()?;
                }
                "goal_situation" => {
                    self.expect(Tok::Colon)?;
                    spec.goal_situation = self.name_groups()?;
                }
                "place" => {
                    let name = self.string()?;
                    let area = self.goal_area_block()?;
                    spec.places.insert(name, area);
                }
                "obstacle_sign" => {
                    let name = self.string()?;
                    self.expect(Tok::Colon)?;
                    let id = self.integer()?;
                    spec.obstacle_signs.insert(name, id);
                }
                "signs" => {
                    self.expect(Tok::LBrace)?;
                    while !self.eat(&Tok::RBrace) {
                        let (key, pos) = self.ident()?;
                        match key.as_str() {
                            "channels" => {
                                self.expect(Tok::Colon)?;
                                self.expect(Tok::LBracket)?;
                                while !self.eat(&Tok::RBracket) {
                                    spec.channels.insert(self.name()?);
                                    self.eat(&Tok::Comma);
                                }
                            }
                            "sign" => {
                                let sign = self.sign(spec.id)?;
                                spec.signs.push(sign);
                            }
                            other => {
                                return Err(syntax(pos, format!("unknown signs key {other:?}")))
                            }
                        }
                    }
                }
                other => return Err(syntax(pos, format!("unknown agent key {other:?}"))),
            }
        }
        if !saw_id {
            return Err(syntax(agent_pos, "agent misses id"));
        }
        Ok(spec)
    }
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<Diagnostic>> {
    let toks = Lexer::new(text).tokens().map_err(|d| vec![d])?;
    let mut parser = Parser { toks, i: 0, positions: Positions::default(), current_agent: 0 };
    let mut scenario = Scenario {
        name: String::new(),
        bounds: Rect::new(0.0, 0.0, 0.0, 0.0),
        res: 1.0,
        types: BTreeMap::new(),
        obstacles: Vec::new(),
        iteration_cap: 100,
        tick_cap: 64,
        agents: Vec::new(),
    };
    let result = (|| -> Result<(), Diagnostic> {
        while parser.peek().is_some() {
            let (key, pos) = parser.ident()?;
            match key.as_str() {
                "name" => {
                    parser.expect(Tok::Colon)?;
                    scenario.name = parser.string()?;
                }
                "world" => parser.world(&mut scenario)?,
                "limits" => {
                    parser.expect(Tok::LBrace)?;
                    while !parser.eat(&Tok::RBrace) {
                        let (key, pos) = parser.ident()?;
                        parser.expect(Tok::Colon)?;
                        match key.as_str() {
                            "iteration_cap" => scenario.iteration_cap = parser.integer()?,
                            "tick_cap" => scenario.tick_cap = parser.integer()?,
                            other => {
                                return Err(syntax(pos, format!("unknown limits key {other:?}")))
                            }
                        }
                    }
                }
                "agent" => {
                    let agent = parser.agent()?;
                    scenario.agents.push(agent);
                }
                other => return Err(syntax(pos, format!("unknown section {other:?}"))),
            }
        }
        Ok(())
    })();
    if let Err(d) = result {
        return Err(vec![d]);
    }
    let diagnostics = validate(&scenario, &parser.positions);
    if diagnostics.is_empty() {
        Ok(scenario)
    } else {
        Err(diagnostics)
    }
}
