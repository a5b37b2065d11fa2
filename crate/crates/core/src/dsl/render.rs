use crate::circuit::{Scheme, WingCircuit};
use crate::numfmt;
use crate::scalar::Scalar;

fn number<T: Scalar>(x: T) -> String {
    if x == T::FRAC_1_SQRT_2() {
        return "1/sqrt2".to_string();
    }
    numfmt::sig(x.to_f64().unwrap_or(f64::NAN), 12)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn wing_block<T: Scalar>(out: &mut String, name: &str, wing: &WingCircuit<T>) {
    out.push_str(&format!("  wing {name} {{\n"));
    for (i, bs) in wing.splitters.iter().enumerate() {
        out.push_str(&format!("    splitter {} ratio {}\n", i + 1, number(bs.r)));
    }
    out.push_str(&format!("    phase ab {}\n", number(wing.phases.ab())));
    out.push_str(&format!("    phase cd {}\n", number(wing.phases.cd())));
    out.push_str("  }\n");
}

/// Canonical text of a scheme: explicit splitter and phase lines, identical
/// wings written as `wing plus = minus`, rules sorted by path pair, numbers
/// at 12 significant digits (`1/sqrt2` for the balanced splitter).
pub fn render<T: Scalar>(scheme: &Scheme<T>) -> String {
    let mut out = format!("scheme {} {{\n", quoted(&scheme.name));
    wing_block(&mut out, "minus", &scheme.minus);
    if scheme.plus == scheme.minus {
        out.push_str("  wing plus = minus\n");
    } else {
        wing_block(&mut out, "plus", &scheme.plus);
    }
    let mut rules = scheme.rules.clone();
    rules.sort();
    if rules.is_empty() {
        out.push_str("  annihilate { }\n");
    } else {
        out.push_str("  annihilate {\n");
        for r in &rules {
            let label = if is_ident(&r.label) {
                r.label.clone()
            } else {
                quoted(&r.label)
            };
            out.push_str(&format!(
                "    ({}-, {}+) -> {label};\n",
                r.minus.letter(),
                r.plus.letter()
            ));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        build_scheme_a, build_scheme_b, AnnihilationRule, BeamSplitter, PhaseSettings,
    };
    use crate::dsl::parse;
    use crate::state::PathId;
    use proptest::prelude::*;

    #[test]
    fn builtin_round_trip() {
        for s in [build_scheme_a(), build_scheme_b()] {
            let text = render(&s);
            assert_eq!(parse::<f64>(&text).unwrap(), s);
            assert_eq!(render(&s), text);
        }
    }

    #[test]
    fn scheme_b_rendering() {
        let expected = "scheme \"b\" {\n  wing minus {\n    splitter 1 ratio 1/sqrt2\n    splitter 2 ratio 1/sqrt2\n    splitter 3 ratio 1/sqrt2\n    phase ab 0\n    phase cd 0\n  }\n  wing plus = minus\n  annihilate {\n    (a-, b+) -> R;\n    (b-, a+) -> S;\n  }\n}\n";
        assert_eq!(render(&build_scheme_b()), expected);
    }

    #[test]
    fn odd_labels_are_quoted() {
        let mut s = build_scheme_a();
        s.rules[0].label = "point \"P\"".into();
        s.name = "with\\slash".into();
        let text = render(&s);
        assert_eq!(parse::<f64>(&text).unwrap(), s);
    }

    fn short_decimal(max: u32) -> impl Strategy<Value = f64> {
        (0..=max).prop_map(|k| f64::from(k) / 1e6)
    }

    fn arb_wing() -> impl Strategy<Value = WingCircuit<f64>> {
        (
            prop::array::uniform3(prop_oneof![
                short_decimal(1_000_000),
                Just(std::f64::consts::FRAC_1_SQRT_2)
            ]),
            short_decimal(6_283_185),
            short_decimal(6_283_185),
        )
            .prop_map(|(rs, ab, cd)| WingCircuit {
                splitters: rs.map(|r| BeamSplitter::new(r).unwrap()),
                phases: PhaseSettings::new(ab, cd),
            })
    }

    prop_compose! {
        fn arb_scheme()(
            minus in arb_wing(),
            plus in prop_oneof![arb_wing().prop_map(Some), Just(None)],
            mask in prop::array::uniform4(any::<bool>()),
            labels in prop::array::uniform4("[A-Za-z_][A-Za-z0-9_]{0,5}|\"[ -~]{0,6}\""),
            name in "[ -~]{0,10}",
        ) -> Scheme<f64> {
            let combos = [
                (PathId::A, PathId::A),
                (PathId::A, PathId::B),
                (PathId::B, PathId::A),
                (PathId::B, PathId::B),
            ];
            let rules = combos
                .iter()
                .zip(mask)
                .enumerate()
                .filter(|(_, (_, on))| *on)
                .map(|(i, (&(m, p), _))| AnnihilationRule::new(m, p, format!("{}{i}", labels[i])))
                .collect();
            Scheme { name, minus, plus: plus.unwrap_or(minus), rules }
        }
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(s in arb_scheme()) {
            let text = render(&s);
            let back = parse::<f64>(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(render(&back), text);
        }
    }
}
