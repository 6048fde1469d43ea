//! Plain-text grid case format.
//!
//! ```text
//! CASE <name> BASEMVA <float>
//! BUS <id> <G|L> <gs> <bs>
//! BRANCH <from> <to> <r> <x> <b> [<tap> [<shift_deg>]]
//! END
//! ```
//!
//! One record per line, `#` starts a comment, blank lines are ignored. All
//! `BUS` records precede all `BRANCH` records. Impedances and shunts are in
//! per-unit on the case base.

pub mod report;

/// The bundled IEEE 118-bus case with its 19-bus generator set.
pub const IEEE_118: &str = include_str!("../../data/ieee118.case");

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl serde::Serialize for BusId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

/// Passive interconnection buses are declared `Load`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BusKind {
    Generator,
    #[default]
    Load,
}

impl BusKind {
    fn token(self) -> &'static str {
        match self {
            BusKind::Generator => "G",
            BusKind::Load => "L",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: BusId,
    pub kind: BusKind,
    /// Shunt conductance, p.u.
    pub gs: f64,
    /// Shunt susceptance, p.u.
    pub bs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub r: f64,
    pub x: f64,
    /// Total line-charging susceptance, split equally between the two ends.
    pub b: f64,
    /// Off-nominal turns ratio at the from end.
    pub tap: f64,
    pub shift_deg: f64,
}

impl Branch {
    pub fn new(from_bus: u32, to_bus: u32, r: f64, x: f64, b: f64) -> Self {
        Self {
            from_bus: BusId(from_bus),
            to_bus: BusId(to_bus),
            r,
            x,
            b,
            tap: 1.0,
            shift_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: duplicate bus id {id}")]
    DuplicateBus { line: usize, id: BusId },
    #[error("line {line}: branch endpoint {id} is not a declared bus")]
    DanglingEndpoint { line: usize, id: BusId },
    #[error("line {line}: branch connects bus {id} to itself")]
    SelfLoop { line: usize, id: BusId },
    #[error("line {line}: branch has zero series impedance")]
    ZeroImpedance { line: usize },
    #[error("line {line}: branch has negative resistance {r}")]
    NegativeResistance { line: usize, r: f64 },
    #[error("line {line}: tap ratio must be positive, got {tap}")]
    NonPositiveTap { line: usize, tap: f64 },
    #[error("case has no generator bus")]
    NoGenerator,
    #[error("case has no load bus")]
    NoLoad,
}

impl GridCase {
    /// Checks every invariant of a case. `parse_case` only returns validated
    /// cases; this is for cases built in code. Line numbers in the returned
    /// error are record positions (1-based, buses first).
    pub fn validate(&self) -> Result<(), CaseError> {
        let mut ids = HashSet::new();
        for (k, bus) in self.buses.iter().enumerate() {
            if !ids.insert(bus.id) {
                return Err(CaseError::DuplicateBus {
                    line: k + 1,
                    id: bus.id,
                });
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            check_branch(br, &ids, self.buses.len() + k + 1)?;
        }
        self.check_kinds()
    }

    pub fn generator_count(&self) -> usize {
        self.buses
            .iter()
            .filter(|b| b.kind == BusKind::Generator)
            .count()
    }

    pub fn load_count(&self) -> usize {
        self.buses.len() - self.generator_count()
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    fn check_kinds(&self) -> Result<(), CaseError> {
        if self.generator_count() == 0 {
            return Err(CaseError::NoGenerator);
        }
        if self.load_count() == 0 {
            return Err(CaseError::NoLoad);
        }
        Ok(())
    }
}

fn check_branch(br: &Branch, ids: &HashSet<BusId>, line: usize) -> Result<(), CaseError> {
    for id in [br.from_bus, br.to_bus] {
        if !ids.contains(&id) {
            return Err(CaseError::DanglingEndpoint { line, id });
        }
    }
    if br.from_bus == br.to_bus {
        return Err(CaseError::SelfLoop {
            line,
            id: br.from_bus,
        });
    }
    if br.r < 0.0 {
        return Err(CaseError::NegativeResistance { line, r: br.r });
    }
    if br.r == 0.0 && br.x == 0.0 {
        return Err(CaseError::ZeroImpedance { line });
    }
    if br.tap <= 0.0 {
        return Err(CaseError::NonPositiveTap { line, tap: br.tap });
    }
    Ok(())
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Record<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    /// Column just past the last token, for "missing field" diagnostics.
    end_column: usize,
}

impl<'a> Record<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> CaseError {
        CaseError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn expect_len(&self, min: usize, max: usize, what: &str) -> Result<(), CaseError> {
        let n = self.tokens.len();
        if n < min {
            return Err(self.err(
                self.end_column,
                format!(
                    "{what} record needs at least {} fields, found {}",
                    min - 1,
                    n - 1
                ),
            ));
        }
        if n > max {
            return Err(self.err(
                self.tokens[max].column,
                format!("unexpected trailing field in {what} record"),
            ));
        }
        Ok(())
    }

    fn float(&self, k: usize, what: &str) -> Result<f64, CaseError> {
        let tok = &self.tokens[k];
        match tok.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(self.err(
                tok.column,
                format!("{what} must be finite, got '{}'", tok.text),
            )),
            Err(_) => Err(self.err(tok.column, format!("invalid {what} '{}'", tok.text))),
        }
    }

    fn id(&self, k: usize, what: &str) -> Result<BusId, CaseError> {
        let tok = &self.tokens[k];
        tok.text
            .parse::<u32>()
            .map(BusId)
            .map_err(|_| self.err(tok.column, format!("invalid {what} '{}'", tok.text)))
    }

    fn keyword(&self) -> &'a str {
        self.tokens[0].text
    }
}

fn records(text: &str) -> impl Iterator<Item = Record<'_>> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in content.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push(Token {
                        text: &content[s..pos],
                        column: content[..s].chars().count() + 1,
                    });
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if let Some(s) = start {
            tokens.push(Token {
                text: &content[s..],
                column: content[..s].chars().count() + 1,
            });
        }
        let end_column = content.trim_end().chars().count() + 1;
        (!tokens.is_empty()).then_some(Record {
            line: k + 1,
            tokens,
            end_column,
        })
    })
}

#[derive(PartialEq, PartialOrd)]
enum Section {
    Header,
    Buses,
    Branches,
    Done,
}

/// Parses and validates a case. Bus order in the result is file order.
pub fn parse_case(text: &str) -> Result<GridCase, CaseError> {
    let mut name = String::new();
    let mut base_mva = 0.0;
    let mut buses = Vec::new();
    let mut branches = Vec::new();
    let mut ids = HashSet::new();
    let mut section = Section::Header;
    let mut last_line = 0;

    for rec in records(text) {
        last_line = rec.line;
        let kw = rec.keyword();
        match (kw, &section) {
            (_, Section::Done) => {
                return Err(rec.err(rec.tokens[0].column, "content after END"));
            }
            ("CASE", Section::Header) => {
                rec.expect_len(4, 4, "CASE")?;
                if rec.tokens[2].text != "BASEMVA" {
                    return Err(rec.err(
                        rec.tokens[2].column,
                        format!("expected BASEMVA, found '{}'", rec.tokens[2].text),
                    ));
                }
                name = rec.tokens[1].text.to_string();
                base_mva = rec.float(3, "base MVA")?;
                if base_mva <= 0.0 {
                    return Err(rec.err(rec.tokens[3].column, "base MVA must be positive"));
                }
                section = Section::Buses;
            }
            (_, Section::Header) => {
                return Err(rec.err(
                    rec.tokens[0].column,
                    format!("expected CASE header, found '{kw}'"),
                ));
            }
            ("BUS", Section::Buses) => {
                rec.expect_len(5, 5, "BUS")?;
                let id = rec.id(1, "bus id")?;
                let kind = match rec.tokens[2].text {
                    "G" => BusKind::Generator,
                    "L" => BusKind::Load,
                    other => {
                        return Err(rec.err(
                            rec.tokens[2].column,
                            format!("bus kind must be G or L, found '{other}'"),
                        ))
                    }
                };
                let gs = rec.float(3, "gs")?;
                let bs = rec.float(4, "bs")?;
                if !ids.insert(id) {
                    return Err(CaseError::DuplicateBus { line: rec.line, id });
                }
                buses.push(Bus { id, kind, gs, bs });
            }
            ("BUS", Section::Branches) => {
                return Err(rec.err(rec.tokens[0].column, "BUS record after BRANCH records"));
            }
            ("BRANCH", Section::Buses | Section::Branches) => {
                section = Section::Branches;
                rec.expect_len(6, 8, "BRANCH")?;
                let branch = Branch {
                    from_bus: rec.id(1, "from bus")?,
                    to_bus: rec.id(2, "to bus")?,
                    r: rec.float(3, "r")?,
                    x: rec.float(4, "x")?,
                    b: rec.float(5, "b")?,
                    tap: if rec.tokens.len() > 6 {
                        rec.float(6, "tap")?
                    } else {
                        1.0
                    },
                    shift_deg: if rec.tokens.len() > 7 {
                        rec.float(7, "shift")?
                    } else {
                        0.0
                    },
                };
                check_branch(&branch, &ids, rec.line)?;
                branches.push(branch);
            }
            ("END", Section::Buses | Section::Branches) => {
                rec.expect_len(1, 1, "END")?;
                section = Section::Done;
            }
            _ => {
                return Err(rec.err(rec.tokens[0].column, format!("unknown record '{kw}'")));
            }
        }
    }

    if section != Section::Done {
        return Err(CaseError::Syntax {
            line: last_line + 1,
            column: 1,
            message: if section == Section::Header {
                "missing CASE header".into()
            } else {
                "missing END".into()
            },
        });
    }

    let case = GridCase {
        name,
        base_mva,
        buses,
        branches,
    };
    case.check_kinds()?;
    Ok(case)
}

/// Serializes a case. Floats use the shortest representation that parses
/// back to the same value; the tap field is written whenever it or the
/// phase shift is off-nominal.
pub fn write_case(case: &GridCase) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "CASE {} BASEMVA {}", case.name, case.base_mva);
    for bus in &case.buses {
        let _ = writeln!(
            out,
            "BUS {} {} {} {}",
            bus.id,
            bus.kind.token(),
            bus.gs,
            bus.bs
        );
    }
    for br in &case.branches {
        let _ = write!(
            out,
            "BRANCH {} {} {} {} {}",
            br.from_bus, br.to_bus, br.r, br.x, br.b
        );
        if br.tap != 1.0 || br.shift_deg != 0.0 {
            let _ = write!(out, " {}", br.tap);
        }
        if br.shift_deg != 0.0 {
            let _ = write!(out, " {}", br.shift_deg);
        }
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "\
# smallest valid case
CASE two BASEMVA 100
BUS 1 G 0 0
BUS 2 L 0 0   # passive
BRANCH 1 2 0.1 0.5 0
END
";

    #[test]
    fn parses_minimal_case() {
        let c = parse_case(TWO_BUS).unwrap();
        assert_eq!(c.name, "two");
        assert_eq!(c.base_mva, 100.0);
        assert_eq!(c.generator_count(), 1);
        assert_eq!(c.load_count(), 1);
        assert_eq!(c.branches[0], Branch::new(1, 2, 0.1, 0.5, 0.0));
    }

    #[test]
    fn self_loop_rejected() {
        let text = TWO_BUS.replace("BRANCH 1 2 0.1 0.5 0", "BRANCH 1 1 0.1 0.5 0");
        assert_eq!(
            parse_case(&text),
            Err(CaseError::SelfLoop {
                line: 5,
                id: BusId(1)
            })
        );
    }

    #[test]
    fn structural_errors() {
        let dup = TWO_BUS.replace("BUS 2 L", "BUS 1 L");
        assert!(matches!(
            parse_case(&dup),
            Err(CaseError::DuplicateBus { line: 4, .. })
        ));

        let dangling = TWO_BUS.replace("BRANCH 1 2", "BRANCH 1 7");
        assert_eq!(
            parse_case(&dangling),
            Err(CaseError::DanglingEndpoint {
                line: 5,
                id: BusId(7)
            })
        );

        let zero = TWO_BUS.replace("0.1 0.5 0", "0 0 0.2");
        assert_eq!(parse_case(&zero), Err(CaseError::ZeroImpedance { line: 5 }));

        let no_gen = TWO_BUS.replace("BUS 1 G", "BUS 1 L");
        assert_eq!(parse_case(&no_gen), Err(CaseError::NoGenerator));

        let no_load = TWO_BUS.replace("BUS 2 L", "BUS 2 G");
        assert_eq!(parse_case(&no_load), Err(CaseError::NoLoad));

        let tap = TWO_BUS.replace("0.1 0.5 0", "0.1 0.5 0 0");
        assert!(matches!(
            parse_case(&tap),
            Err(CaseError::NonPositiveTap { .. })
        ));
    }

    #[test]
    fn syntax_errors_report_position() {
        let bad = TWO_BUS.replace("0.1 0.5 0", "0.1 abc 0");
        assert_eq!(
            parse_case(&bad),
            Err(CaseError::Syntax {
                line: 5,
                column: 16,
                message: "invalid x 'abc'".into()
            })
        );
        let kind = TWO_BUS.replace("BUS 2 L", "BUS 2 Q");
        assert!(matches!(
            parse_case(&kind),
            Err(CaseError::Syntax {
                line: 4,
                column: 7,
                ..
            })
        ));
        let no_end = TWO_BUS.replace("END\n", "");
        assert!(matches!(
            parse_case(&no_end),
            Err(CaseError::Syntax { line: 6, .. })
        ));
        let nan = TWO_BUS.replace("BUS 2 L 0 0", "BUS 2 L NaN 0");
        assert!(matches!(
            parse_case(&nan),
            Err(CaseError::Syntax {
                line: 4,
                column: 9,
                ..
            })
        ));
        assert!(matches!(
            parse_case(""),
            Err(CaseError::Syntax { line: 1, .. })
        ));
        let trailing = TWO_BUS.replace("END\n", "END\nBUS 3 L 0 0\n");
        assert!(matches!(
            parse_case(&trailing),
            Err(CaseError::Syntax { line: 7, .. })
        ));
    }

    #[test]
    fn bus_after_branch_rejected() {
        let text =
            "CASE x BASEMVA 1\nBUS 1 G 0 0\nBUS 2 L 0 0\nBRANCH 1 2 0.1 0.1 0\nBUS 3 L 0 0\nEND\n";
        assert!(matches!(
            parse_case(text),
            Err(CaseError::Syntax {
                line: 5,
                column: 1,
                ..
            })
        ));
    }

    #[test]
    fn optional_fields_round_trip() {
        let mut c = parse_case(TWO_BUS).unwrap();
        c.branches[0].tap = 1.05;
        let text = write_case(&c);
        assert!(text.contains("BRANCH 1 2 0.1 0.5 0 1.05\n"), "{text}");
        assert_eq!(parse_case(&text).unwrap(), c);

        c.branches[0].tap = 1.0;
        c.branches[0].shift_deg = -10.0;
        let text = write_case(&c);
        assert!(text.contains("BRANCH 1 2 0.1 0.5 0 1 -10\n"), "{text}");
        assert_eq!(parse_case(&text).unwrap(), c);
    }

    #[test]
    fn two_bus_round_trip() {
        let c = parse_case(TWO_BUS).unwrap();
        assert_eq!(parse_case(&write_case(&c)).unwrap(), c);
    }

    #[test]
    fn validate_matches_parser() {
        let mut c = parse_case(TWO_BUS).unwrap();
        assert_eq!(c.validate(), Ok(()));
        c.branches[0].r = -0.1;
        assert!(matches!(
            c.validate(),
            Err(CaseError::NegativeResistance { .. })
        ));
    }
}
