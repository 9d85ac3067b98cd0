//! The concrete systems of the split scheme.
//!
//! `Xbar = (X1, X2)` and `X3 = (X30, X31)` are written out label by label.

use super::{Atom, InequalitySystem, LinearConstraint, Sense};
use crate::info::labels::{X1, X2, X30, X31, Y2, Y3, Y4, YHAT3};

const XBAR: [&str; 2] = [X1, X2];
const X3: [&str; 2] = [X30, X31];

fn cat<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}

fn build(vars: &[&str], rows: Vec<LinearConstraint>) -> InequalitySystem {
    let mut s = InequalitySystem::new(vars, vec![]);
    for r in rows {
        s.push(r).expect("declared variables");
    }
    s
}

/// Error-event constraints of joint decoding with the rate-distortion
/// requirement and nonnegativity: eleven constraints over `R, R30, R31`.
pub fn appendix_system() -> InequalitySystem {
    use Sense::{Ge, Le};
    let a1 = Atom::mi(&[X1], &[Y2], &[X2, X30]);
    let a2 = Atom::mi(&XBAR, &[YHAT3, Y4], &X3);
    let a3 = Atom::mi(&[YHAT3], &cat(&XBAR, &[Y4]), &X3);
    let a4 = Atom::mi(&X3, &[Y4], &XBAR);
    let a5 = Atom::mi(&cat(&XBAR, &X3), &[Y4], &[]);
    let a6 = Atom::mi(&[X31], &[Y4], &cat(&XBAR, &[X30]));
    let a7 = Atom::mi(&cat(&XBAR, &[X31]), &[Y4], &[X30]);
    let a8 = Atom::mi(&[X1, X30], &[Y2], &[X2]);
    let a9 = Atom::mi(&[YHAT3], &[Y3], &X3);
    let c = LinearConstraint::new;
    build(
        &["R", "R30", "R31"],
        vec![
            c("JD1", &[("R", 1)], Le, &[(&a1, 1)], 0),
            c("JD2", &[("R", 1)], Le, &[(&a2, 1)], 0),
            c("JD3", &[("R30", 1), ("R31", 1)], Le, &[(&a3, 1), (&a4, 1)], 0),
            c("JD4", &[("R", 1), ("R30", 1), ("R31", 1)], Le, &[(&a3, 1), (&a5, 1)], 0),
            c("JD5", &[("R31", 1)], Le, &[(&a3, 1), (&a6, 1)], 0),
            c("JD6", &[("R", 1), ("R31", 1)], Le, &[(&a3, 1), (&a7, 1)], 0),
            c("JD9", &[("R", 1), ("R30", 1)], Le, &[(&a8, 1)], 0),
            c("JD7", &[("R30", 1), ("R31", 1)], Ge, &[(&a9, 1)], 0),
            c("R>=0", &[("R", 1)], Ge, &[], 0),
            c("R30>=0", &[("R30", 1)], Ge, &[], 0),
            c("R31>=0", &[("R31", 1)], Ge, &[], 0),
        ],
    )
}

fn penalty() -> Atom {
    Atom::mi(&[YHAT3], &[Y3], &cat(&XBAR, &cat(&X3, &[Y4])))
}

/// The five rate bounds of the joint-decoding theorem, over `R` only.
pub fn theorem2_bounds_system() -> InequalitySystem {
    use Sense::Le;
    let pen = penalty();
    let relay = Atom::mi(&[X1, X30], &[Y2], &[X2]);
    let c = LinearConstraint::new;
    build(
        &["R"],
        vec![
            c("jd1", &[("R", 1)], Le, &[(&Atom::mi(&[X1], &[Y2], &[X2, X30]), 1)], 0),
            c("jd2", &[("R", 1)], Le, &[(&Atom::mi(&XBAR, &[YHAT3, Y4], &X3), 1)], 0),
            c(
                "jd3",
                &[("R", 1)],
                Le,
                &[(&Atom::mi(&cat(&XBAR, &X3), &[Y4], &[]), 1), (&pen, -1)],
                0,
            ),
            c(
                "jd9",
                &[("R", 1)],
                Le,
                &[
                    (&Atom::mi(&[X31], &[Y4], &cat(&XBAR, &[X30])), 1),
                    (&pen, -1),
                    (&relay, 1),
                ],
                0,
            ),
            c(
                "2R",
                &[("R", 2)],
                Le,
                &[
                    (&Atom::mi(&cat(&XBAR, &[X31]), &[Y4], &[X30]), 1),
                    (&pen, -1),
                    (&Atom::mi(&[X30], &[Y2], &XBAR), 1),
                    (&Atom::mi(&[X1], &[Y2], &[X2]), 1),
                ],
                0,
            ),
        ],
    )
}

/// The five bounds plus the condition `I(Yhat3;Y3|Xbar X3 Y4) <= I(X3;Y4|Xbar)`.
pub fn theorem2_system() -> InequalitySystem {
    let mut s = theorem2_bounds_system();
    s.push(LinearConstraint::new(
        "cond",
        &[],
        Sense::Le,
        &[(&Atom::mi(&X3, &[Y4], &XBAR), 1), (&penalty(), -1)],
        0,
    ))
    .expect("no variables");
    s
}

/// The successive-decoding bounds with their feasibility condition, treated
/// as non-strict like every other constraint.
pub fn theorem3_system() -> InequalitySystem {
    use Sense::Le;
    let pen = penalty();
    let cloud = Atom::mi(&[X30], &[Y2], &[X2]);
    let c = LinearConstraint::new;
    build(
        &["R"],
        vec![
            c("sd1", &[("R", 1)], Le, &[(&Atom::mi(&[X1], &[Y2], &[X2, X30]), 1)], 0),
            c("sd2", &[("R", 1)], Le, &[(&Atom::mi(&XBAR, &[YHAT3, Y4], &X3), 1)], 0),
            c(
                "sd3",
                &[("R", 1)],
                Le,
                &[(&Atom::mi(&cat(&XBAR, &X3), &[Y4], &[]), 1), (&pen, -1)],
                0,
            ),
            c(
                "sd4",
                &[("R", 1)],
                Le,
                &[
                    (&Atom::mi(&cat(&XBAR, &[X31]), &[Y4], &[X30]), 1),
                    (&pen, -1),
                    (&cloud, 1),
                ],
                0,
            ),
            c(
                "sd5",
                &[],
                Le,
                &[
                    (&Atom::mi(&[X31], &[Y4], &cat(&XBAR, &[X30])), 1),
                    (&cloud, 1),
                    (&pen, -1),
                ],
                0,
            ),
        ],
    )
}

/// Atoms of the noise-treating fallback `min(I(X1;Y2|X2 X30), I(Xbar;Y4))`.
pub fn fallback_atoms() -> [Atom; 2] {
    [Atom::mi(&[X1], &[Y2], &[X2, X30]), Atom::mi(&XBAR, &[Y4], &[])]
}
