use splitfix::engines::{IterConfig, Schedule, Scheme};

use super::{
    Expr, Matrix, Pos, ProblemError, ProblemFile, SchemeSection, SetExpr, SmipForm, SmipSection,
    SpecExpr,
};

type Result<T> = std::result::Result<T, ProblemError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Semi,
    Comma,
    Slash,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(v) => format!("number {v}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

fn lex(line: &str, line_no: usize, start_col: usize) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos {
            line: line_no,
            column: start_col + i,
        };
        let starts_number = c.is_ascii_digit()
            || c == '.'
            || ((c == '-' || c == '+')
                && chars
                    .get(i + 1)
                    .is_some_and(|n| n.is_ascii_digit() || *n == '.'));
        if c.is_whitespace() {
            i += 1;
        } else if starts_number {
            let begin = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[begin..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| ProblemError::at(pos, format!("malformed number `{text}`")))?;
            if !value.is_finite() {
                return Err(ProblemError::at(
                    pos,
                    format!("number `{text}` is not finite"),
                ));
            }
            out.push((Tok::Num(value), pos));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(chars[begin..i].iter().collect()), pos));
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '/' => Tok::Slash,
                '=' => Tok::Eq,
                other => {
                    return Err(ProblemError::at(
                        pos,
                        format!("unexpected character `{other}`"),
                    ))
                }
            };
            out.push((tok, pos));
            i += 1;
        }
    }
    Ok(out)
}

/// Cursor over the tokens of one value.
struct Cursor {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self, what: &str) -> Result<(Tok, Pos)> {
        let pos = self.pos();
        let t =
            self.toks.get(self.i).cloned().ok_or_else(|| {
                ProblemError::at(pos, format!("expected {what}, found end of line"))
            })?;
        self.i += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        let (t, pos) = self.next(&tok.describe())?;
        if t == tok {
            Ok(())
        } else {
            Err(ProblemError::at(
                pos,
                format!("expected {}, found {}", tok.describe(), t.describe()),
            ))
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

    fn finish(&self) -> Result<()> {
        match self.toks.get(self.i) {
            None => Ok(()),
            Some((t, p)) => Err(ProblemError::at(
                *p,
                format!("unexpected {} after value", t.describe()),
            )),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos)> {
        match self.next(what)? {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(ProblemError::at(
                p,
                format!("expected {what}, found {}", t.describe()),
            )),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let (t, pos) = self.next("a number")?;
        let Tok::Num(num) = t else {
            return Err(ProblemError::at(
                pos,
                format!("expected a number, found {}", t.describe()),
            ));
        };
        if self.eat(&Tok::Slash) {
            let den_pos = self.pos();
            let (t, _) = self.next("a denominator")?;
            let Tok::Num(den) = t else {
                return Err(ProblemError::at(
                    den_pos,
                    format!("expected a denominator, found {}", t.describe()),
                ));
            };
            if den == 0.0 {
                return Err(ProblemError::at(den_pos, "division by zero"));
            }
            return Ok(num / den);
        }
        Ok(num)
    }

    fn count(&mut self) -> Result<usize> {
        let pos = self.pos();
        let v = self.number()?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(ProblemError::at(
                pos,
                format!("expected a nonnegative integer, found {v}"),
            ));
        }
        Ok(v as usize)
    }

    fn row(&mut self) -> Result<Vec<f64>> {
        let mut row = vec![self.number()?];
        while self.eat(&Tok::Comma) {
            row.push(self.number()?);
        }
        Ok(row)
    }

    /// `[a, b, …]`, or a bare number for a one-element vector.
    fn vector(&mut self) -> Result<Vec<f64>> {
        if !self.eat(&Tok::LBrack) {
            return Ok(vec![self.number()?]);
        }
        let v = self.row()?;
        self.expect(Tok::RBrack)?;
        Ok(v)
    }

    /// `[a, b; c, d]`, or a bare number for a 1×1 matrix.
    fn matrix(&mut self) -> Result<Matrix> {
        let start = self.pos();
        if !self.eat(&Tok::LBrack) {
            return Ok(Matrix {
                rows: vec![vec![self.number()?]],
            });
        }
        let mut rows = vec![self.row()?];
        while self.eat(&Tok::Semi) {
            rows.push(self.row()?);
        }
        self.expect(Tok::RBrack)?;
        if rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(ProblemError::at(
                start,
                "matrix rows have different lengths",
            ));
        }
        Ok(Matrix { rows })
    }

    fn set(&mut self) -> Result<SetExpr> {
        let (name, pos) = self.ident("`box` or `ball`")?;
        self.expect(Tok::LParen)?;
        let set = match name.as_str() {
            "box" => {
                let lo = self.vector()?;
                self.expect(Tok::Semi)?;
                let hi = self.vector()?;
                SetExpr::Box { lo, hi }
            }
            "ball" => {
                let center = self.vector()?;
                self.expect(Tok::Semi)?;
                let radius = self.number()?;
                SetExpr::Ball { center, radius }
            }
            other => {
                return Err(ProblemError::at(
                    pos,
                    format!("unknown set `{other}` (expected box or ball)"),
                ))
            }
        };
        self.expect(Tok::RParen)?;
        Ok(set)
    }

    fn spec(&mut self) -> Result<SpecExpr> {
        let (name, pos) = self.ident("a monotone operator")?;
        if name == "zero" {
            return Ok(SpecExpr::Zero);
        }
        self.expect(Tok::LParen)?;
        let spec = match name.as_str() {
            "psd" => SpecExpr::Psd(self.matrix()?),
            "abs" => SpecExpr::Abs(self.number()?),
            "normal_cone" => SpecExpr::NormalCone(self.set()?),
            other => return Err(ProblemError::at(
                pos,
                format!(
                    "unknown monotone operator `{other}` (expected zero, psd, abs or normal_cone)"
                ),
            )),
        };
        self.expect(Tok::RParen)?;
        Ok(spec)
    }

    fn expr(&mut self) -> Result<Expr> {
        let (name, pos) = self.ident("an operator expression")?;
        let keyword = matches!(
            name.as_str(),
            "identity"
                | "affine"
                | "linear"
                | "scale"
                | "proj_box"
                | "proj_ball"
                | "resolvent"
                | "fb"
                | "compose"
                | "sum"
        );
        if !keyword {
            if self.peek() == Some(&Tok::LParen) {
                return Err(ProblemError::at(
                    pos,
                    format!("unknown operator form `{name}`"),
                ));
            }
            return Ok(Expr::Ref { name, pos });
        }
        if name == "identity" {
            return Ok(Expr::Identity);
        }
        self.expect(Tok::LParen)?;
        let e = match name.as_str() {
            "affine" => {
                let m = self.matrix()?;
                self.expect(Tok::Semi)?;
                let b = self.vector()?;
                Expr::Affine { m, b }
            }
            "linear" => Expr::Linear(self.matrix()?),
            "scale" => Expr::Scale(self.number()?),
            "proj_box" => {
                let lo = self.vector()?;
                self.expect(Tok::Semi)?;
                let hi = self.vector()?;
                Expr::ProjBox { lo, hi }
            }
            "proj_ball" => {
                let center = self.vector()?;
                self.expect(Tok::Semi)?;
                let radius = self.number()?;
                Expr::ProjBall { center, radius }
            }
            "resolvent" => {
                let spec = self.spec()?;
                self.expect(Tok::Semi)?;
                let lambda = self.number()?;
                Expr::Resolvent { spec, lambda }
            }
            "fb" => {
                let spec = self.spec()?;
                self.expect(Tok::Semi)?;
                let g = self.expr()?;
                self.expect(Tok::Semi)?;
                let lambda = self.number()?;
                Expr::Fb {
                    spec,
                    g: Box::new(g),
                    lambda,
                }
            }
            "compose" | "sum" => {
                let f = self.expr()?;
                self.expect(Tok::Semi)?;
                let g = self.expr()?;
                if name == "compose" {
                    Expr::Compose(Box::new(f), Box::new(g))
                } else {
                    Expr::Sum(Box::new(f), Box::new(g))
                }
            }
            _ => unreachable!("keyword list covers every form"),
        };
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    fn schedule(&mut self) -> Result<Schedule<f64>> {
        let (name, pos) = self.ident("a schedule")?;
        let wrap = |r: splitfix::Result<Schedule<f64>>| {
            r.map_err(|e| ProblemError::at(pos, format!("invalid schedule: {e}")))
        };
        if name == "rational_shift" {
            return Ok(Schedule::rational_shift());
        }
        self.expect(Tok::LParen)?;
        let s = match name.as_str() {
            "constant" => wrap(Schedule::constant(self.number()?))?,
            "power" => wrap(Schedule::power(self.number()?))?,
            "geometric" => {
                let r = self.number()?;
                self.expect(Tok::Semi)?;
                let c0 = self.number()?;
                wrap(Schedule::geometric(r, c0))?
            }
            "table" => wrap(Schedule::table(self.vector()?))?,
            other => {
                return Err(ProblemError::at(
                    pos,
                    format!("unknown schedule `{other}` (expected constant, power, rational_shift, geometric or table)"),
                ))
            }
        };
        self.expect(Tok::RParen)?;
        Ok(s)
    }
}

struct Entry {
    key: String,
    key_pos: Pos,
    value: Cursor,
}

struct Section {
    name: String,
    pos: Pos,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        let i = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(i))
    }

    fn require(&mut self, key: &str) -> Result<Entry> {
        self.take(key).ok_or_else(|| {
            ProblemError::at(
                self.pos,
                format!("section [{}] is missing `{key}`", self.name),
            )
        })
    }

    fn finish(self) -> Result<()> {
        match self.entries.first() {
            None => Ok(()),
            Some(e) => Err(ProblemError::at(
                e.key_pos,
                format!("unknown key `{}` in section [{}]", e.key, self.name),
            )),
        }
    }
}

fn value<T>(entry: Option<Entry>, f: impl FnOnce(&mut Cursor) -> Result<T>) -> Result<Option<T>> {
    entry
        .map(|mut e| {
            let v = f(&mut e.value)?;
            e.value.finish()?;
            Ok(v)
        })
        .transpose()
}

fn required<T>(entry: Entry, f: impl FnOnce(&mut Cursor) -> Result<T>) -> Result<T> {
    value(Some(entry), f).map(|v| v.expect("entry present"))
}

const SECTIONS: [&str; 5] = ["space", "operators", "smip", "fixedpoint", "scheme"];

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let lead_col = content[..lead].chars().count() + 1;
        let pos = Pos {
            line: line_no,
            column: lead_col,
        };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ProblemError::at(pos, "section header must end with `]`"))?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ProblemError::at(
                    pos,
                    format!(
                        "unknown section [{name}] (expected one of {})",
                        SECTIONS.join(", ")
                    ),
                ));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ProblemError::at(
                    pos,
                    format!("section [{name}] appears twice"),
                ));
            }
            sections.push(Section {
                name: name.to_string(),
                pos,
                entries: Vec::new(),
            });
            continue;
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| ProblemError::at(pos, "entry before the first section header"))?;
        let toks = lex(content, line_no, 1)?;
        let mut iter = toks.into_iter();
        let (key, key_pos) = match iter.next() {
            Some((Tok::Ident(k), p)) => (k, p),
            Some((t, p)) => {
                return Err(ProblemError::at(
                    p,
                    format!("expected a key, found {}", t.describe()),
                ))
            }
            None => unreachable!("line is not blank"),
        };
        match iter.next() {
            Some((Tok::Eq, _)) => {}
            Some((t, p)) => {
                return Err(ProblemError::at(
                    p,
                    format!("expected `=`, found {}", t.describe()),
                ))
            }
            None => {
                return Err(ProblemError::at(
                    Pos {
                        line: line_no,
                        column: content.chars().count() + 1,
                    },
                    "expected `=` after key",
                ))
            }
        }
        let rest: Vec<(Tok, Pos)> = iter.collect();
        let end = Pos {
            line: line_no,
            column: content.trim_end().chars().count() + 1,
        };
        if rest.is_empty() {
            return Err(ProblemError::at(end, format!("missing value for `{key}`")));
        }
        if section.name != "operators" && section.entries.iter().any(|e| e.key == key) {
            return Err(ProblemError::at(
                key_pos,
                format!("key `{key}` appears twice in section [{}]", section.name),
            ));
        }
        section.entries.push(Entry {
            key,
            key_pos,
            value: Cursor {
                toks: rest,
                i: 0,
                end,
            },
        });
    }
    Ok(sections)
}

const RESERVED: [&str; 11] = [
    "identity",
    "affine",
    "linear",
    "scale",
    "proj_box",
    "proj_ball",
    "resolvent",
    "fb",
    "compose",
    "sum",
    "zero",
];

/// Parses a problem file. Name resolution and dimension checks happen in
/// [`ProblemFile::build`].
pub fn parse(text: &str) -> Result<ProblemFile> {
    let mut sections = split_sections(text)?;
    let mut take_section = |name: &str| -> Result<Section> {
        let i = sections
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| ProblemError::general(format!("missing section [{name}]")))?;
        Ok(sections.remove(i))
    };

    let mut space = take_section("space")?;
    let h1 = required(space.require("h1")?, Cursor::count)?;
    let h2 = required(space.require("h2")?, Cursor::count)?;
    if h1 == 0 || h2 == 0 {
        return Err(ProblemError::at(space.pos, "dimensions must be positive"));
    }
    space.finish()?;

    let operators = match take_section("operators") {
        Ok(sec) => {
            let mut ops: Vec<(String, Expr)> = Vec::new();
            for mut e in sec.entries {
                if RESERVED.contains(&e.key.as_str()) {
                    return Err(ProblemError::at(
                        e.key_pos,
                        format!("`{}` is a reserved word and cannot name an operator", e.key),
                    ));
                }
                if ops.iter().any(|(n, _)| *n == e.key) {
                    return Err(ProblemError::at(
                        e.key_pos,
                        format!("operator `{}` is defined more than once", e.key),
                    ));
                }
                let expr = e.value.expr()?;
                e.value.finish()?;
                ops.push((e.key, expr));
            }
            ops
        }
        Err(_) => Vec::new(),
    };

    let mut smip = take_section("smip")?;
    let u = smip.take("U");
    let v = smip.take("V");
    let form = if u.is_some() || v.is_some() {
        for key in ["g1", "g2", "B1", "B2", "lambda", "mu", "nu"] {
            if let Some(e) = smip.take(key) {
                return Err(ProblemError::at(
                    e.key_pos,
                    format!("`{key}` cannot be combined with a direct U/V form"),
                ));
            }
        }
        SmipForm::Direct {
            u: value(u, Cursor::expr)?.unwrap_or(Expr::Identity),
            v: value(v, Cursor::expr)?.unwrap_or(Expr::Identity),
        }
    } else {
        SmipForm::Components {
            g1: value(smip.take("g1"), Cursor::expr)?.unwrap_or(Expr::Scale(0.0)),
            g2: value(smip.take("g2"), Cursor::expr)?.unwrap_or(Expr::Scale(0.0)),
            b1: value(smip.take("B1"), Cursor::spec)?.unwrap_or(SpecExpr::Zero),
            b2: value(smip.take("B2"), Cursor::spec)?.unwrap_or(SpecExpr::Zero),
            lambda: required(smip.require("lambda")?, Cursor::number)?,
            mu: value(smip.take("mu"), Cursor::number)?,
            nu: value(smip.take("nu"), Cursor::number)?,
        }
    };
    let a = required(smip.require("A")?, Cursor::matrix)?;
    let a_adjoint = value(smip.take("A_adjoint"), Cursor::matrix)?;
    let gamma = required(smip.require("gamma")?, Cursor::number)?;
    smip.finish()?;

    let mut fixed = take_section("fixedpoint")?;
    let s = required(fixed.require("S")?, Cursor::expr)?;
    fixed.finish()?;

    let mut sch = take_section("scheme")?;
    let defaults = IterConfig::<f64>::new(Scheme::InertialModifiedS);
    let name_entry = sch.require("name")?;
    let scheme = required(name_entry, |c| {
        let (name, pos) = c.ident("a scheme name")?;
        name.parse::<Scheme>()
            .map_err(|_| ProblemError::at(pos, format!("unknown scheme `{name}`")))
    })?;
    let scheme_section = SchemeSection {
        scheme,
        theta: value(sch.take("theta"), Cursor::schedule)?.unwrap_or(defaults.theta),
        alpha: value(sch.take("alpha"), Cursor::schedule)?.unwrap_or(defaults.alpha),
        beta: value(sch.take("beta"), Cursor::schedule)?.unwrap_or(defaults.beta),
        max_iter: value(sch.take("max_iter"), Cursor::count)?.unwrap_or(defaults.stop.max_iter),
        step_tol: value(sch.take("step_tol"), Cursor::number)?.unwrap_or(defaults.stop.step_tol),
        residual_tol: value(sch.take("residual_tol"), Cursor::number)?
            .unwrap_or(defaults.stop.residual_tol),
        guard: value(sch.take("guard"), Cursor::number)?.unwrap_or(defaults.guard),
        delta: value(sch.take("delta"), Cursor::number)?.unwrap_or(defaults.delta),
        x0: required(sch.require("x0")?, Cursor::vector)?,
        x_minus_one: value(sch.take("x_minus_one"), Cursor::vector)?,
        x_star: value(sch.take("x_star"), Cursor::vector)?,
    };
    sch.finish()?;

    Ok(ProblemFile {
        h1,
        h2,
        operators,
        smip: SmipSection {
            form,
            a,
            a_adjoint,
            gamma,
        },
        s,
        scheme: scheme_section,
    })
}
