use super::constraint::Constraint;
use super::space::{HypothesisSpace, RuleId};

/// θ-subsumption: some substitution θ of `general`'s variables by `specific`'s
/// variables maps the body of `general` into the body of `specific`, as sets
/// of signed literals. Symmetric literals match in either orientation.
pub fn subsumes(general: &Constraint, specific: &Constraint) -> bool {
    let k = general.num_vars() as usize;
    let targets = specific.num_vars().max(1);
    let mut map = vec![1u8; k];
    loop {
        let all_in = general.body().iter().all(|l| {
            let image = l.renamed(&map);
            specific.body().binary_search_by(|x| cmp_lit(x, &image)).is_ok()
        });
        if all_in {
            return true;
        }
        // next substitution
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if map[i] < targets {
                map[i] += 1;
                break;
            }
            map[i] = 1;
        }
    }
}

fn cmp_lit(a: &super::constraint::Literal, b: &super::constraint::Literal) -> std::cmp::Ordering {
    (&*a.pred, !a.positive, a.args).cmp(&(&*b.pred, !b.positive, b.args))
}

/// All members of `space` subsuming `r`.
pub fn subsumers(r: &Constraint, space: &HypothesisSpace) -> Vec<RuleId> {
    space.subsumers(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::bias::LanguageBias;
    use crate::hypothesis::space::build_space;

    fn abs(s: &str) -> Constraint {
        Constraint::parse_with(s, LanguageBias::abstract_scheme()).unwrap()
    }

    #[test]
    fn basic_cases() {
        assert!(subsumes(&abs(":- q(V1,V1)."), &abs(":- not pGEQ(V1,V1), q(V1,V1).")));
        assert!(!subsumes(&abs(":- pGEQ(V1,V1)."), &abs(":- q(V1,V1).")));
        assert!(subsumes(&abs(":- q(V1,V2)."), &abs(":- q(V1,V1).")));
        assert!(!subsumes(&abs(":- q(V1,V1)."), &abs(":- q(V1,V2).")));
        // sign matters
        assert!(!subsumes(&abs(":- pGEQ(V1,V1)."), &abs(":- not pGEQ(V1,V1), q(V1,V1).")));
    }

    #[test]
    fn symmetric_orientation() {
        assert!(subsumes(
            &abs(":- close(V1,V2), q(V2,V2)."),
            &abs(":- close(V1,V2), q(V1,V1).")
        ));
    }

    #[test]
    fn close_subsumed_only_by_itself() {
        let space = build_space(LanguageBias::abstract_scheme());
        let r = abs(":- close(V1,V2).");
        let subs = subsumers(&r, &space);
        assert_eq!(subs, vec![space.id_of(&r).unwrap()]);
    }

    #[test]
    fn reflexive_on_space() {
        let space = build_space(LanguageBias::abstract_scheme());
        for (_, r) in space.iter() {
            assert!(subsumes(r, r), "{r}");
        }
    }
}
