//! Textual model names: `pos`, `neg`, `psi`, `eta`, `zero:<W>`,
//! `zero-twisted:<W>`, `offdiag:<W>`, `tensor:<model>:<d>`, `sum:<a>:<b>`.
//! `<W>` is a matrix file path or one of the built-ins `diag1i`, `one`.

use super::*;

pub fn parse_model(spec: &str, load: &dyn Fn(&str) -> Result<CMat>) -> Result<ModelPair> {
    let tokens: Vec<&str> = spec.split(':').collect();
    let mut pos = 0;
    let m = parse_at(&tokens, &mut pos, load)?;
    if pos != tokens.len() {
        return Err(Error::UnknownModel(format!("{spec} (trailing `{}`)", tokens[pos..].join(":"))));
    }
    Ok(m)
}

fn builtin_w(name: &str) -> Option<CMat> {
    match name {
        "diag1i" => Some(default_w()),
        "one" => Some(CMat::identity(1, 1)),
        _ => None,
    }
}

fn parse_at(t: &[&str], pos: &mut usize, load: &dyn Fn(&str) -> Result<CMat>) -> Result<ModelPair> {
    let head = *t.get(*pos).ok_or_else(|| Error::UnknownModel("empty model name".into()))?;
    *pos += 1;
    let take_w = |pos: &mut usize| -> Result<(String, CMat)> {
        let arg = *t
            .get(*pos)
            .ok_or_else(|| Error::UnknownModel(format!("{head} needs a matrix argument")))?;
        *pos += 1;
        let w = match builtin_w(arg) {
            Some(w) => w,
            None => load(arg)?,
        };
        Ok((arg.to_string(), w))
    };
    let named = |mut m: ModelPair, name: String| {
        m.name = name;
        m
    };
    match head {
        "pos" => Ok(pos_pair()),
        "neg" => Ok(neg_pair()),
        "psi" => Ok(psi_pair()),
        "eta" => Ok(eta_pair()),
        "zero" => {
            let (a, w) = take_w(pos)?;
            Ok(named(zero_pair(&w)?, format!("zero:{a}")))
        }
        "zero-twisted" => {
            let (a, w) = take_w(pos)?;
            Ok(named(zero_pair_twisted(&w)?, format!("zero-twisted:{a}")))
        }
        "offdiag" => {
            let (a, w) = take_w(pos)?;
            Ok(named(offdiag_pair(&w)?, format!("offdiag:{a}")))
        }
        "tensor" => {
            let inner = parse_at(t, pos, load)?;
            let d: usize = t
                .get(*pos)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::UnknownModel("tensor needs a multiplicity".into()))?;
            *pos += 1;
            tensor_multiplicity(&inner, d)
        }
        "sum" => {
            let a = parse_at(t, pos, load)?;
            let b = parse_at(t, pos, load)?;
            Ok(direct_sum(&a, &b))
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_files(p: &str) -> Result<CMat> {
        Err(Error::UnknownModel(p.to_string()))
    }

    #[test]
    fn nested_names() {
        let m = parse_model("sum:pos:tensor:offdiag:one:3", &no_files).unwrap();
        assert_eq!(m.name, "sum:pos:tensor:offdiag:one:3");
        assert_eq!(m.declared_class, DefectClass::Mixed);
        assert!(parse_model("sum:pos", &no_files).is_err());
        assert!(parse_model("pos:extra", &no_files).is_err());
        assert!(parse_model("zero:missing.json", &no_files).is_err());
    }
}
