use std::collections::{HashMap, HashSet};

use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseDiagnostic, SourceSpan};
use crate::circuit::{AnnihilationRule, BeamSplitter, PhaseSettings, Scheme, WingCircuit};
use crate::scalar::Scalar;
use crate::state::{PathId, Wing};

/// A successfully parsed scheme together with any warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T: Scalar> {
    pub scheme: Scheme<T>,
    pub warnings: Vec<ParseDiagnostic>,
}

/// Parses a scheme document. On failure every diagnostic (warnings included)
/// is returned, sorted by position.
pub fn parse<T: Scalar>(text: &str) -> Result<Scheme<T>, Vec<ParseDiagnostic>> {
    parse_with_warnings(text).map(|p| p.scheme)
}

/// Like [`parse`] for raw bytes; non-UTF-8 input yields an "invalid encoding"
/// diagnostic pointing at the first offending byte.
pub fn parse_bytes<T: Scalar>(bytes: &[u8]) -> Result<Scheme<T>, Vec<ParseDiagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let valid = std::str::from_utf8(valid).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(vec![ParseDiagnostic::error(
                SourceSpan::new(line, column, 1),
                "invalid encoding: input is not valid UTF-8",
            )])
        }
    }
}

pub fn parse_with_warnings<T: Scalar>(text: &str) -> Result<Parsed<T>, Vec<ParseDiagnostic>> {
    let (tokens, end) = tokenize(text).map_err(|d| vec![d])?;
    if tokens.is_empty() {
        return Err(vec![ParseDiagnostic::error(
            SourceSpan::new(1, 1, 0),
            "missing scheme block",
        )]);
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end,
        diags: Vec::new(),
    };
    let scheme = parser.document::<T>();
    let mut diags = parser.diags;
    diags.sort_by_key(|d| d.span);
    match scheme {
        Ok(scheme) if !diags.iter().any(ParseDiagnostic::is_error) => Ok(Parsed {
            scheme,
            warnings: diags,
        }),
        _ => Err(diags),
    }
}

/// Parses a lone number in scheme syntax, e.g. `0.25`, `-1.5` or `1/sqrt2`.
pub fn parse_number(text: &str) -> Result<f64, ParseDiagnostic> {
    let (tokens, end) = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end,
        diags: Vec::new(),
    };
    let parsed = parser.number();
    if let Ok((value, over_sqrt2, _)) = parsed {
        if let Some(tok) = parser.peek() {
            return Err(ParseDiagnostic::error(
                tok.span,
                format!("unexpected {} after number", tok.kind.describe()),
            ));
        }
        return Ok(if over_sqrt2 {
            value * std::f64::consts::FRAC_1_SQRT_2
        } else {
            value
        });
    }
    Err(parser.diags.remove(0))
}

/// Marker for a syntax error already recorded in `diags`.
struct Stop;

type PResult<T> = Result<T, Stop>;

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: SourceSpan,
    diags: Vec<ParseDiagnostic>,
}

#[derive(Default)]
struct WingDraft {
    splitters: [Option<(f64, bool)>; 3],
    ab: Option<f64>,
    cd: Option<f64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.diags.push(ParseDiagnostic::error(span, message));
    }

    fn fail<T>(&mut self, span: SourceSpan, message: impl Into<String>) -> PResult<T> {
        self.error(span, message);
        Err(Stop)
    }

    /// Records "expected ..." at the current token (or end of input).
    fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        match self.peek().cloned() {
            Some(tok) => self.fail(
                tok.span,
                format!("expected {expected}, found {}", tok.kind.describe()),
            ),
            None => {
                let end = self.end;
                self.fail(end, format!("unexpected end of input, expected {expected}"))
            }
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.peek_kind() == Some(&kind) {
            Ok(self.bump().expect("peeked"))
        } else {
            self.unexpected(&kind.describe())
        }
    }

    fn ident(&mut self, expected: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().cloned() {
            Some(Token {
                kind: TokenKind::Ident(name),
                span,
            }) => {
                self.pos += 1;
                Ok((name, span))
            }
            _ => self.unexpected(expected),
        }
    }

    fn wing_name(&mut self) -> PResult<(Wing, SourceSpan)> {
        let (name, span) = self.ident("'minus' or 'plus'")?;
        match name.as_str() {
            "minus" => Ok((Wing::Minus, span)),
            "plus" => Ok((Wing::Plus, span)),
            other => self.fail(span, format!("expected 'minus' or 'plus', found '{other}'")),
        }
    }

    /// `[+|-] <decimal> [/ sqrt2]`, returned as `(value, over_sqrt2, span)`.
    fn number(&mut self) -> PResult<(f64, bool, SourceSpan)> {
        let start = self.peek().map(|t| t.span);
        let mut sign = 1.0;
        match self.peek_kind() {
            Some(TokenKind::Minus) => {
                sign = -1.0;
                self.pos += 1;
            }
            Some(TokenKind::Plus) => self.pos += 1,
            _ => {}
        }
        let tok = match self.peek().cloned() {
            Some(
                t @ Token {
                    kind: TokenKind::Number(_),
                    ..
                },
            ) => {
                self.pos += 1;
                t
            }
            _ => return self.unexpected("a number"),
        };
        let TokenKind::Number(raw) = &tok.kind else {
            unreachable!()
        };
        let value: f64 = raw.parse().unwrap_or(f64::NAN);
        let mut last = tok.span;
        let mut over_sqrt2 = false;
        if self.peek_kind() == Some(&TokenKind::Slash) {
            self.pos += 1;
            let (name, span) = self.ident("'sqrt2'")?;
            if name != "sqrt2" {
                return self.fail(span, format!("expected 'sqrt2' after '/', found '{name}'"));
            }
            over_sqrt2 = true;
            last = span;
        }
        let start = start.unwrap_or(tok.span);
        let span = if start.line == last.line {
            SourceSpan::new(
                start.line,
                start.column,
                last.column + last.length - start.column,
            )
        } else {
            start
        };
        let value = sign * value;
        if !value.is_finite() {
            return self.fail(span, "number out of range");
        }
        Ok((value, over_sqrt2, span))
    }

    fn document<T: Scalar>(&mut self) -> PResult<Scheme<T>> {
        let (kw, kw_span) = self.ident("'scheme'")?;
        if kw != "scheme" {
            return self.fail(
                kw_span,
                format!("unknown keyword '{kw}', expected 'scheme'"),
            );
        }
        let name = match self.peek().cloned() {
            Some(Token {
                kind: TokenKind::Str(s) | TokenKind::Ident(s),
                ..
            }) => {
                self.pos += 1;
                s
            }
            _ => return self.unexpected("scheme name"),
        };
        self.expect(TokenKind::LBrace)?;

        let mut wings: HashMap<Wing, Option<WingCircuit<T>>> = HashMap::new();
        let mut rules: Option<Vec<AnnihilationRule>> = None;
        let close = loop {
            match self.peek().cloned() {
                Some(Token {
                    kind: TokenKind::RBrace,
                    span,
                }) => {
                    self.pos += 1;
                    break span;
                }
                Some(Token {
                    kind: TokenKind::Ident(word),
                    span,
                }) => match word.as_str() {
                    "wing" => {
                        self.pos += 1;
                        self.wing(&mut wings)?;
                    }
                    "annihilate" => {
                        self.pos += 1;
                        let parsed = self.annihilate()?;
                        if rules.is_some() {
                            self.error(span, "duplicate annihilate block");
                        } else {
                            rules = Some(parsed);
                        }
                    }
                    other => return self.fail(span, format!("unknown keyword '{other}'")),
                },
                Some(_) => return self.unexpected("'wing', 'annihilate' or '}'"),
                None => return self.unexpected("'}'"),
            }
        };
        if let Some(tok) = self.peek().cloned() {
            return self.fail(tok.span, "unexpected content after scheme block");
        }

        let mut take = |wing: Wing, this: &mut Self| match wings.remove(&wing) {
            Some(c) => c,
            None => {
                this.error(close, format!("missing wing '{}'", wing.name()));
                None
            }
        };
        let minus = take(Wing::Minus, self);
        let plus = take(Wing::Plus, self);
        let (Some(minus), Some(plus)) = (minus, plus) else {
            return Err(Stop);
        };
        let mut rules = rules.unwrap_or_default();
        rules.sort();
        let scheme = Scheme {
            name,
            minus,
            plus,
            rules,
        };
        if let Err(violations) = scheme.validate() {
            for v in violations {
                self.error(kw_span, v.to_string());
            }
        }
        Ok(scheme)
    }

    fn wing<T: Scalar>(
        &mut self,
        wings: &mut HashMap<Wing, Option<WingCircuit<T>>>,
    ) -> PResult<()> {
        let (side, side_span) = self.wing_name()?;
        let duplicate = wings.contains_key(&side);
        if duplicate {
            self.error(side_span, format!("duplicate wing '{}'", side.name()));
        }
        let circuit = match self.peek_kind() {
            Some(TokenKind::Equals) => {
                self.pos += 1;
                let (source, source_span) = self.wing_name()?;
                if source == side {
                    self.error(source_span, "a wing cannot clone itself");
                    None
                } else if let Some(c) = wings.get(&source) {
                    *c
                } else {
                    self.error(
                        source_span,
                        format!("wing '{}' referenced before definition", source.name()),
                    );
                    None
                }
            }
            Some(TokenKind::LBrace) => {
                self.pos += 1;
                self.wing_body::<T>()?
            }
            _ => return self.unexpected("'{' or '='"),
        };
        if !duplicate {
            wings.insert(side, circuit);
        }
        Ok(())
    }

    /// Parses up to the closing brace; `None` when a semantic error was recorded.
    fn wing_body<T: Scalar>(&mut self) -> PResult<Option<WingCircuit<T>>> {
        let mut draft = WingDraft::default();
        let mut ok = true;
        loop {
            match self.peek().cloned() {
                Some(Token {
                    kind: TokenKind::RBrace,
                    ..
                }) => {
                    self.pos += 1;
                    break;
                }
                Some(Token {
                    kind: TokenKind::Semi,
                    ..
                }) => self.pos += 1,
                Some(Token {
                    kind: TokenKind::Ident(word),
                    span,
                }) => {
                    self.pos += 1;
                    match word.as_str() {
                        "splitter" => ok &= self.splitter_line(&mut draft)?,
                        "phase" => ok &= self.phase_line(&mut draft)?,
                        other => return self.fail(span, format!("unknown keyword '{other}'")),
                    }
                }
                Some(_) => return self.unexpected("'splitter', 'phase' or '}'"),
                None => return self.unexpected("'}'"),
            }
        }
        if !ok {
            return Ok(None);
        }
        let mut circuit = WingCircuit::<T>::balanced();
        for (slot, entry) in circuit.splitters.iter_mut().zip(draft.splitters) {
            if let Some((r, _)) = entry {
                *slot = BeamSplitter::new(T::lit(r)).map_err(|_| Stop)?;
            }
        }
        circuit.phases = PhaseSettings::new(
            T::lit(draft.ab.unwrap_or(0.0)),
            T::lit(draft.cd.unwrap_or(0.0)),
        );
        Ok(Some(circuit))
    }

    fn splitter_line(&mut self, draft: &mut WingDraft) -> PResult<bool> {
        let index_tok = match self.peek().cloned() {
            Some(
                t @ Token {
                    kind: TokenKind::Number(_),
                    ..
                },
            ) => {
                self.pos += 1;
                t
            }
            _ => return self.unexpected("splitter index"),
        };
        let TokenKind::Number(raw) = &index_tok.kind else {
            unreachable!()
        };
        let index = match raw.as_str() {
            "1" => Some(0),
            "2" => Some(1),
            "3" => Some(2),
            _ => None,
        };
        let (mode, mode_span) = self.ident("'ratio' or 'intensity'")?;
        let intensity = match mode.as_str() {
            "ratio" => false,
            "intensity" => true,
            other => {
                return self.fail(
                    mode_span,
                    format!("expected 'ratio' or 'intensity', found '{other}'"),
                )
            }
        };
        let (value, over_sqrt2, span) = self.number()?;
        let Some(index) = index else {
            self.error(index_tok.span, "splitter index must be 1, 2 or 3");
            return Ok(false);
        };
        let mut value = value;
        if over_sqrt2 {
            value *= std::f64::consts::FRAC_1_SQRT_2;
        }
        if !(0.0..=1.0).contains(&value) {
            let what = if intensity { "intensity" } else { "ratio" };
            self.error(span, format!("{what} outside [0,1]"));
            return Ok(false);
        }
        if draft.splitters[index].is_some() {
            self.error(index_tok.span, format!("duplicate splitter {}", index + 1));
            return Ok(false);
        }
        let r = if intensity { value.sqrt() } else { value };
        draft.splitters[index] = Some((r, intensity));
        Ok(true)
    }

    fn phase_line(&mut self, draft: &mut WingDraft) -> PResult<bool> {
        let (which, which_span) = self.ident("'ab' or 'cd'")?;
        if which != "ab" && which != "cd" {
            return self.fail(
                which_span,
                format!("expected 'ab' or 'cd', found '{which}'"),
            );
        }
        let (mut value, over_sqrt2, span) = self.number()?;
        if over_sqrt2 {
            value *= std::f64::consts::FRAC_1_SQRT_2;
        }
        let slot = if which == "ab" {
            &mut draft.ab
        } else {
            &mut draft.cd
        };
        if slot.is_some() {
            self.error(which_span, format!("duplicate phase {which}"));
            return Ok(false);
        }
        *slot = Some(value);
        if !(0.0..std::f64::consts::TAU).contains(&value) {
            self.diags.push(ParseDiagnostic::warning(
                span,
                "phase normalized modulo 2*pi",
            ));
        }
        Ok(true)
    }

    fn annihilate(&mut self) -> PResult<Vec<AnnihilationRule>> {
        self.expect(TokenKind::LBrace)?;
        let mut rules = Vec::new();
        let mut labels = HashSet::new();
        let mut pairs = HashSet::new();
        loop {
            match self.peek().cloned() {
                Some(Token {
                    kind: TokenKind::RBrace,
                    ..
                }) => {
                    self.pos += 1;
                    break;
                }
                Some(Token {
                    kind: TokenKind::Semi,
                    ..
                }) => self.pos += 1,
                Some(Token {
                    kind: TokenKind::LParen,
                    span: open,
                }) => {
                    self.pos += 1;
                    let minus = self.rule_path()?;
                    self.expect(TokenKind::Minus)?;
                    self.expect(TokenKind::Comma)?;
                    let plus = self.rule_path()?;
                    self.expect(TokenKind::Plus)?;
                    self.expect(TokenKind::RParen)?;
                    self.expect(TokenKind::Arrow)?;
                    let (label, label_span) = match self.peek().cloned() {
                        Some(Token {
                            kind: TokenKind::Ident(s) | TokenKind::Str(s),
                            span,
                        }) => {
                            self.pos += 1;
                            (s, span)
                        }
                        _ => return self.unexpected("gamma label"),
                    };
                    let mut ok = minus.is_some() && plus.is_some();
                    if !labels.insert(label.clone()) {
                        self.error(label_span, format!("duplicate gamma label '{label}'"));
                        ok = false;
                    }
                    if let (Some(m), Some(p)) = (minus, plus) {
                        if !pairs.insert((m, p)) {
                            self.error(
                                open,
                                format!(
                                    "duplicate annihilation path pair ({}-, {}+)",
                                    m.letter(),
                                    p.letter()
                                ),
                            );
                            ok = false;
                        }
                        if ok {
                            rules.push(AnnihilationRule::new(m, p, label));
                        }
                    }
                }
                Some(_) => return self.unexpected("'(' or '}'"),
                None => return self.unexpected("'}'"),
            }
        }
        Ok(rules)
    }

    /// A rule path; `None` (with an error recorded) for valid paths outside stage 1.
    fn rule_path(&mut self) -> PResult<Option<PathId>> {
        let (name, span) = self.ident("a path name")?;
        let path = PathId::ALL.into_iter().find(|p| p.letter() == name);
        match path {
            Some(p @ (PathId::A | PathId::B)) => Ok(Some(p)),
            Some(_) => {
                self.error(span, "annihilation rule outside stage-1 paths");
                Ok(None)
            }
            None => self.fail(span, format!("unknown path '{name}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_scheme_a, build_scheme_b};
    use crate::dsl::Severity;
    use proptest::prelude::*;

    const SCHEME_A: &str = include_str!("../../schemes/scheme_a.scm.txt");
    const SCHEME_B: &str = include_str!("../../schemes/scheme_b.scm.txt");

    fn errors(text: &str) -> Vec<ParseDiagnostic> {
        parse::<f64>(text).unwrap_err()
    }

    #[test]
    fn bundled_files_match_builtins() {
        assert_eq!(parse::<f64>(SCHEME_A).unwrap(), build_scheme_a());
        assert_eq!(parse::<f64>(SCHEME_B).unwrap(), build_scheme_b());
    }

    #[test]
    fn empty_input() {
        let d = errors("");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "missing scheme block");
        assert_eq!(d[0].span, SourceSpan::new(1, 1, 0));
        assert_eq!(
            errors("  # only a comment\n")[0].message,
            "missing scheme block"
        );
    }

    #[test]
    fn rule_outside_stage_one() {
        let text = "scheme \"x\" {\n  wing minus { }\n  wing plus = minus\n  annihilate { (c-, a+) -> X }\n}\n";
        let d = errors(text);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "annihilation rule outside stage-1 paths");
        assert_eq!(d[0].span, SourceSpan::new(4, 17, 1));
    }

    #[test]
    fn defaults_are_balanced() {
        let s = parse::<f64>("scheme s { wing minus {} wing plus {} }").unwrap();
        assert_eq!(s.minus, WingCircuit::balanced());
        assert_eq!(s.plus, WingCircuit::balanced());
        assert!(s.rules.is_empty());
    }

    #[test]
    fn intensity_keyword_converts_to_amplitude() {
        let s = parse::<f64>(
            "scheme s { wing minus { splitter 1 intensity 0.25 splitter 2 intensity 0.5 } wing plus = minus }",
        )
        .unwrap();
        assert!((s.minus.splitters[0].r - 0.5).abs() < 1e-15);
        assert_eq!(s.minus.splitters[1], BeamSplitter::fifty_fifty());
        assert_eq!(s.plus, s.minus);
    }

    #[test]
    fn semantic_errors_accumulate() {
        let text = "scheme s {\n wing minus { splitter 2 ratio 1.5 }\n wing minus {}\n wing plus {}\n annihilate { (a-, a+) -> P; (b-, b+) -> P }\n}";
        let d = errors(text);
        let msgs: Vec<_> = d.iter().map(|x| x.message.as_str()).collect();
        assert_eq!(
            msgs,
            vec![
                "ratio outside [0,1]",
                "duplicate wing 'minus'",
                "duplicate gamma label 'P'",
            ]
        );
        assert_eq!(d[0].span, SourceSpan::new(2, 32, 3));
    }

    #[test]
    fn unknown_keyword() {
        let d = errors("scheme s {\n  wing minus {\n    mirror 1\n  }\n}");
        assert_eq!(d[0].message, "unknown keyword 'mirror'");
        assert_eq!(d[0].span, SourceSpan::new(3, 5, 6));
    }

    #[test]
    fn missing_wing_and_truncation() {
        let d = errors("scheme s { wing minus {} }");
        assert_eq!(d[0].message, "missing wing 'plus'");
        let d = errors("scheme s { wing minus {");
        assert!(d[0].message.starts_with("unexpected end of input"));
        assert_eq!(d[0].span, SourceSpan::new(1, 24, 0));
    }

    #[test]
    fn clone_before_definition() {
        let d = errors("scheme s { wing plus = minus wing minus {} }");
        assert_eq!(d[0].message, "wing 'minus' referenced before definition");
    }

    #[test]
    fn phase_warning_and_normalization() {
        let p = parse_with_warnings::<f64>(
            "scheme s { wing minus { phase ab -1 phase cd 1/sqrt2 } wing plus = minus }",
        )
        .unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.warnings[0].severity, Severity::Warning);
        assert!((p.scheme.minus.phases.ab() - (std::f64::consts::TAU - 1.0)).abs() < 1e-12);
        assert_eq!(p.scheme.minus.phases.cd(), std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn rules_are_sorted() {
        let s = parse::<f64>(
            "scheme s { wing minus {} wing plus = minus annihilate { (b-, a+) -> S (a-, b+) -> R } }",
        )
        .unwrap();
        assert_eq!(s.rules[0].label, "R");
    }

    #[test]
    fn lone_numbers() {
        assert_eq!(parse_number("0.25"), Ok(0.25));
        assert_eq!(parse_number("-2"), Ok(-2.0));
        assert_eq!(parse_number("1/sqrt2"), Ok(std::f64::consts::FRAC_1_SQRT_2));
        assert!(parse_number("").is_err());
        assert!(parse_number("0.5 x").is_err());
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn invalid_utf8() {
        let d = parse_bytes::<f64>(b"scheme s {\n \xff }").unwrap_err();
        assert!(d[0].message.starts_with("invalid encoding"));
        assert_eq!(d[0].span, SourceSpan::new(2, 2, 1));
    }

    fn within_bounds(text: &str, span: SourceSpan) -> bool {
        let lines: Vec<&str> = text.split('\n').collect();
        span.line >= 1
            && span.line <= lines.len()
            && span.column >= 1
            && span.column + span.length <= lines[span.line - 1].chars().count() + 1
    }

    proptest! {
        #[test]
        fn arbitrary_text_never_panics(text in ".{0,400}") {
            if let Err(diags) = parse::<f64>(&text) {
                prop_assert!(!diags.is_empty());
                for d in diags {
                    prop_assert!(within_bounds(&text, d.span), "{d} out of bounds in {text:?}");
                }
            }
        }

        #[test]
        fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..4096)) {
            let _ = parse_bytes::<f64>(&bytes);
        }

        #[test]
        fn mutated_fixture_never_panics(cut in 0usize..400, insert in "[{}()a-z0-9 ;,=+/#\"-]{0,8}") {
            let mut text: String = SCHEME_B.chars().take(cut).collect();
            text.push_str(&insert);
            text.extend(SCHEME_B.chars().skip(cut));
            if let Err(diags) = parse::<f64>(&text) {
                for d in diags {
                    prop_assert!(within_bounds(&text, d.span), "{d} out of bounds in {text:?}");
                }
            }
        }
    }
}
