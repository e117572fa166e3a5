//! Line-oriented instance format.
//!
//! ```text
//! PREDICATES:   <name>/<arity> ...
//! OBJECTS:      <id> ...
//! ROBOTS:       <robot-id>: <cap-name>(<robot-id>, <term>...) ...
//! CAPABILITIES: <cap-name>(<params>) -> <lit> & <lit> ...    # lit := ATOM | !ATOM
//! CIRS:         <id>: {<atom>, ...} -> <atom>
//! TASKS:        <id>: {<atom-or-cap>, ...} @ <utility>
//! INIT:         <ground-atom> ...
//! DELTA:        [-<ground-atom> | +<ground-atom>] ...
//! ```
//!
//! Sections must appear in this order; a missing section is empty. `#`
//! starts a comment that runs to the end of the line.

use std::fmt::Write as _;

use super::{
    validate, Atom, CapabilitySchema, Cir, DeltaOp, EffectLiteral, Instance, ModelError, Polarity,
    PredicateSchema, RawInstance, RawTask, Robot, Term,
};

const SECTIONS: [&str; 8] = [
    "PREDICATES",
    "OBJECTS",
    "ROBOTS",
    "CAPABILITIES",
    "CIRS",
    "TASKS",
    "INIT",
    "DELTA",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Slash,
    Colon,
    LParen,
    RParen,
    Comma,
    LBrace,
    RBrace,
    Arrow,
    Amp,
    Bang,
    At,
    Minus,
    Plus,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Slash => "`/`".into(),
            Tok::Colon => "`:`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bang => "`!`".into(),
            Tok::At => "`@`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Plus => "`+`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ModelError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (lineno + 1, i + 1);
            let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, col });
            match c {
                '#' => break,
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len()
                        && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '+')
                    {
                        i += 1;
                    }
                    push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                    continue;
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    let n = s.parse().map_err(|_| ModelError::Syntax {
                        line,
                        col,
                        msg: format!("number `{s}` out of range"),
                    })?;
                    push(&mut out, Tok::Num(n));
                    continue;
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    push(&mut out, Tok::Arrow);
                    i += 2;
                    continue;
                }
                '/' => push(&mut out, Tok::Slash),
                ':' => push(&mut out, Tok::Colon),
                '(' => push(&mut out, Tok::LParen),
                ')' => push(&mut out, Tok::RParen),
                ',' => push(&mut out, Tok::Comma),
                '{' => push(&mut out, Tok::LBrace),
                '}' => push(&mut out, Tok::RBrace),
                '&' => push(&mut out, Tok::Amp),
                '!' => push(&mut out, Tok::Bang),
                '@' => push(&mut out, Tok::At),
                '-' => push(&mut out, Tok::Minus),
                '+' => push(&mut out, Tok::Plus),
                other => {
                    return Err(ModelError::Syntax {
                        line,
                        col,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Self, ModelError> {
        let toks = lex(text)?;
        let end = (text.lines().count().max(1), 1);
        Ok(Parser { toks, pos: 0, end })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn error(&self, msg: impl Into<String>) -> ModelError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.end);
        ModelError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn unexpected(&self, expected: &str) -> ModelError {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {}", t.describe())),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ModelError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ModelError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn num(&mut self) -> Result<u64, ModelError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    /// True when the cursor is at `NAME:` for a section header, or at the end.
    fn at_section_boundary(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (None, _) => true,
            (Some(Tok::Ident(s)), Some(Tok::Colon)) => SECTIONS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Atom, ModelError> {
        let predicate = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(Term::from_ident(&self.ident()?));
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(Atom { predicate, args })
    }

    fn constant(&mut self, what: &str) -> Result<String, ModelError> {
        let save = self.pos;
        let id = self.ident()?;
        if super::is_variable_name(&id) {
            self.pos = save;
            return Err(self.error(format!(
                "{what} `{id}` must not start with an uppercase letter"
            )));
        }
        Ok(id)
    }

    fn atom_set(&mut self) -> Result<Vec<Atom>, ModelError> {
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(items);
        }
        loop {
            items.push(self.atom()?);
            if self.eat(&Tok::RBrace) {
                return Ok(items);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn parse(&mut self) -> Result<RawInstance, ModelError> {
        let mut raw = RawInstance::default();
        let mut next_section = 0;
        while self.peek().is_some() {
            if !self.at_section_boundary() {
                return Err(self.unexpected("a section header"));
            }
            let name = self.ident()?;
            let idx = SECTIONS.iter().position(|s| *s == name).unwrap();
            if idx < next_section {
                self.pos -= 1;
                return Err(self.error(format!("section {name} out of order or repeated")));
            }
            next_section = idx + 1;
            self.expect(Tok::Colon)?;
            match name.as_str() {
                "PREDICATES" => {
                    while !self.at_section_boundary() {
                        let name = self.ident()?;
                        self.expect(Tok::Slash)?;
                        let arity = self.num()? as usize;
                        raw.predicates.push(PredicateSchema { name, arity });
                    }
                }
                "OBJECTS" => {
                    while !self.at_section_boundary() {
                        raw.objects.push(self.constant("object")?);
                    }
                }
                "ROBOTS" => {
                    while !self.at_section_boundary() {
                        let id = self.constant("robot")?;
                        self.expect(Tok::Colon)?;
                        let mut capabilities = Vec::new();
                        while matches!(self.peek(), Some(Tok::Ident(_)))
                            && self.peek_at(1) == Some(&Tok::LParen)
                        {
                            capabilities.push(self.atom()?);
                        }
                        raw.robots.push(Robot { id, capabilities });
                    }
                }
                "CAPABILITIES" => {
                    while !self.at_section_boundary() {
                        raw.capabilities.push(self.capability()?);
                    }
                }
                "CIRS" => {
                    while !self.at_section_boundary() {
                        let id = self.ident()?;
                        self.expect(Tok::Colon)?;
                        let antecedents = self.atom_set()?;
                        self.expect(Tok::Arrow)?;
                        let consequent = self.atom()?;
                        raw.cirs.push(Cir {
                            id,
                            antecedents,
                            consequent,
                        });
                    }
                }
                "TASKS" => {
                    while !self.at_section_boundary() {
                        let id = self.ident()?;
                        self.expect(Tok::Colon)?;
                        let requirements = self.atom_set()?;
                        self.expect(Tok::At)?;
                        let negative = self.eat(&Tok::Minus);
                        let n = self.num()?;
                        let n = i64::try_from(n).map_err(|_| self.error("utility out of range"))?;
                        raw.tasks.push(RawTask {
                            id,
                            requirements,
                            utility: if negative { -n } else { n },
                        });
                    }
                }
                "INIT" => {
                    while !self.at_section_boundary() {
                        raw.init.push(self.atom()?);
                    }
                }
                "DELTA" => {
                    while !self.at_section_boundary() {
                        if self.eat(&Tok::Plus) {
                            raw.delta.push(DeltaOp::Add(self.atom()?));
                        } else if self.eat(&Tok::Minus) {
                            raw.delta.push(DeltaOp::Remove(self.atom()?));
                        } else {
                            return Err(self.unexpected("`+` or `-`"));
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        Ok(raw)
    }

    fn capability(&mut self) -> Result<CapabilitySchema, ModelError> {
        let head = self.atom()?;
        let params = head.args.iter().map(|t| t.name().to_string()).collect();
        self.expect(Tok::Arrow)?;
        let mut effects = Vec::new();
        loop {
            let polarity = if self.eat(&Tok::Bang) {
                Polarity::RequiresUnconstrained
            } else {
                Polarity::Constrains
            };
            effects.push(EffectLiteral {
                atom: self.atom()?,
                polarity,
            });
            if !self.eat(&Tok::Amp) {
                break;
            }
        }
        Ok(CapabilitySchema {
            name: head.predicate,
            params,
            effects,
        })
    }
}

/// Parses a document into an unvalidated [`RawInstance`].
pub fn parse_raw_instance(text: &str) -> Result<RawInstance, ModelError> {
    Parser::new(text)?.parse()
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    validate(parse_raw_instance(text)?)
}

/// Parses a single atom such as `F_On(o2,o1)`.
pub fn parse_atom(text: &str) -> Result<Atom, ModelError> {
    let mut p = Parser::new(text)?;
    let atom = p.atom()?;
    if p.peek().is_some() {
        return Err(p.unexpected("end of atom"));
    }
    Ok(atom)
}

/// Parses `+ATOM` or `-ATOM`.
pub(crate) fn parse_delta_op(text: &str) -> Result<DeltaOp, ModelError> {
    let mut p = Parser::new(text)?;
    let op = if p.eat(&Tok::Plus) {
        DeltaOp::Add(p.atom()?)
    } else if p.eat(&Tok::Minus) {
        DeltaOp::Remove(p.atom()?)
    } else {
        return Err(p.unexpected("`+` or `-`"));
    };
    if p.peek().is_some() {
        return Err(p.unexpected("end of delta operation"));
    }
    Ok(op)
}

/// Parses `ATOM` or `!ATOM`.
pub(crate) fn parse_effect(text: &str) -> Result<EffectLiteral, ModelError> {
    let mut p = Parser::new(text)?;
    let polarity = if p.eat(&Tok::Bang) {
        Polarity::RequiresUnconstrained
    } else {
        Polarity::Constrains
    };
    let atom = p.atom()?;
    if p.peek().is_some() {
        return Err(p.unexpected("end of effect"));
    }
    Ok(EffectLiteral { atom, polarity })
}

fn join<T: std::fmt::Display>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Writes the canonical document for an instance. Every section header is
/// emitted, even when the section is empty.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let preds: Vec<String> = inst
        .predicates
        .iter()
        .map(|p| format!("{}/{}", p.name, p.arity))
        .collect();
    writeln!(out, "PREDICATES: {}", preds.join(" ")).unwrap();
    writeln!(out, "OBJECTS: {}", inst.objects.join(" ")).unwrap();
    out.push_str("ROBOTS:\n");
    for r in &inst.robots {
        if r.capabilities.is_empty() {
            writeln!(out, "  {}:", r.id).unwrap();
        } else {
            writeln!(out, "  {}: {}", r.id, join(&r.capabilities, " ")).unwrap();
        }
    }
    out.push_str("CAPABILITIES:\n");
    for c in &inst.capabilities {
        writeln!(
            out,
            "  {}({}) -> {}",
            c.name,
            c.params.join(","),
            join(&c.effects, " & ")
        )
        .unwrap();
    }
    out.push_str("CIRS:\n");
    for q in &inst.cirs {
        writeln!(
            out,
            "  {}: {{{}}} -> {}",
            q.id,
            join(&q.antecedents, ", "),
            q.consequent
        )
        .unwrap();
    }
    out.push_str("TASKS:\n");
    for t in &inst.tasks {
        writeln!(
            out,
            "  {}: {{{}}} @ {}",
            t.id,
            join(&t.requirements, ", "),
            t.utility
        )
        .unwrap();
    }
    writeln!(out, "INIT: {}", join(&inst.init, " ")).unwrap();
    writeln!(out, "DELTA: {}", join(&inst.delta, " ")).unwrap();
    // trailing spaces on empty sections are not part of the canonical form
    out.lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUNNING: &str = include_str!("../../../../fixtures/running_example.tampic");

    #[test]
    fn lexes_plus_in_predicate_names() {
        let a = parse_atom("F_Weight+(Y)").unwrap();
        assert_eq!(a.predicate, "F_Weight+");
        assert_eq!(a.args, vec![Term::Var("Y".into())]);
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_raw_instance("PREDICATES: F_On/2\nOBJECTS: o1 $").unwrap_err();
        assert_eq!(
            err,
            ModelError::Syntax {
                line: 2,
                col: 13,
                msg: "unexpected character `$`".into()
            }
        );
        let err = parse_raw_instance("PREDICATES: F_On 2").unwrap_err();
        assert!(
            matches!(
                err,
                ModelError::Syntax {
                    line: 1,
                    col: 18,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn sections_out_of_order_rejected() {
        let err = parse_raw_instance("OBJECTS: o1\nPREDICATES: F/1").unwrap_err();
        assert!(
            matches!(
                err,
                ModelError::Syntax {
                    line: 2,
                    col: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn uppercase_object_rejected() {
        let err = parse_raw_instance("OBJECTS: o1 Box").unwrap_err();
        assert!(
            matches!(
                err,
                ModelError::Syntax {
                    line: 1,
                    col: 13,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn running_example_round_trips() {
        let inst = parse_instance(RUNNING).unwrap();
        let doc = serialize_instance(&inst);
        assert_eq!(parse_instance(&doc).unwrap(), inst);
        assert_eq!(serialize_instance(&parse_instance(&doc).unwrap()), doc);
    }

    #[test]
    fn zero_cir_instance_keeps_empty_section() {
        let mut inst = parse_instance(RUNNING).unwrap();
        inst.cirs.clear();
        let doc = serialize_instance(&inst);
        assert!(doc.contains("\nCIRS:\nTASKS:\n"), "{doc}");
        assert_eq!(parse_instance(&doc).unwrap(), inst);
    }

    #[test]
    fn delta_and_effect_helpers() {
        assert_eq!(
            parse_delta_op("-F_On(o2,o1)").unwrap(),
            DeltaOp::Remove(parse_atom("F_On(o2,o1)").unwrap())
        );
        let e = parse_effect("!F_On(Y,Z)").unwrap();
        assert_eq!(e.polarity, Polarity::RequiresUnconstrained);
        assert!(parse_effect("F_On(Y,Z) x").is_err());
    }
}
