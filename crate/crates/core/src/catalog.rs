//! The compiled library of base theories.
//!
//! Every family is available both as a compiled `TheorySpec` (shape clauses
//! over the measure space) and as an axiom-schema generator used by the
//! spectrum-vs-axioms cross-validation. Names use ASCII aliases; parameters
//! are appended after a colon, e.g. `T_geq:2`, `T_mn:5,2`, `T_n_sigma:1`.

use crate::formula::{SchematicFormula, Signature};
use crate::oracle::GrowthOracle;
use crate::spectrum::{BitFn, MeasureConstraint, MeasureSel, SMode, ShapeClause, TheorySpec};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Seed of the default balanced bit function standing in for the
/// non-computable 0/1 function of the `T_f` family.
pub const DEFAULT_BIT_SEED: u64 = 0xC0FFEE;
const BIT_LEN: usize = 4096;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("theory `{family}` expects {expected} parameter(s), got {got}")]
    BadArity { family: String, expected: usize, got: usize },
    #[error("invalid parameters for `{family}`: {msg}")]
    BadParams { family: String, msg: String },
    #[error("{0}")]
    Other(String),
}

/// The base theory families.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Family {
    Geq,      // T_geq:n        Sigma1  card >= n
    EvenInf,  // T_even_inf     Sigma1  finite cards even
    Inf,      // T_inf          Sigma1  infinite only
    NInf,     // T_n_inf:n      Sigma1  card = n or infinite
    Leq,      // T_leq:n        Sigma1  card <= n
    Mn,       // T_mn:m,n       Sigma1  card in {m, n}
    T23,      // T_23           Sigma2
    TwoInf,   // T_2_inf        Sigma2
    OneOdd,   // T_1_odd        Sigma2
    OneInf,   // T_1_inf        Sigma2
    F,        // T_f            SigmaS
    FS,       // T_f_s          SigmaS
    Neq2Inf,  // T_neq_2inf     SigmaS
    NeqOdd,   // T_neq_odd      SigmaS
    Neq1Inf,  // T_neq_1inf     SigmaS
    UpInf,    // T_upinf        Sigma2
    MnInf,    // T_mn_inf:m,n   Sigma2
    InfNeq,   // T_inf_neq      SigmaS2
    T233,     // T_23_3         Sigma3
    Sigma,    // T_sigma        Sigma1
    SigmaInf, // T_sigma_inf    Sigma2
    NSigma,   // T_n_sigma:n    Sigma2
    MnBB,     // T_mn_BB:m,n    Sigma2
    BBS,      // T_BB_s         SigmaS
    BBNeq,    // T_BB_neq       SigmaS
    BB1Neq,   // T_BB1_neq      SigmaS
    BBVee,    // T_BB_vee       SigmaS
    BBEq,     // T_BB_eq        SigmaS2
    BB2,      // T_BB2          SigmaS2
    BBVeeEq,  // T_BBvee_eq     SigmaS2
    SigmaNeqInf, // T_sigmaneq_inf SigmaS2
    BBInf3,   // T_BB_inf3      Sigma3
}

pub const ALL_FAMILIES: [Family; 32] = [
    Family::Geq,
    Family::EvenInf,
    Family::Inf,
    Family::NInf,
    Family::Leq,
    Family::Mn,
    Family::T23,
    Family::TwoInf,
    Family::OneOdd,
    Family::OneInf,
    Family::F,
    Family::FS,
    Family::Neq2Inf,
    Family::NeqOdd,
    Family::Neq1Inf,
    Family::UpInf,
    Family::MnInf,
    Family::InfNeq,
    Family::T233,
    Family::Sigma,
    Family::SigmaInf,
    Family::NSigma,
    Family::MnBB,
    Family::BBS,
    Family::BBNeq,
    Family::BB1Neq,
    Family::BBVee,
    Family::BBEq,
    Family::BB2,
    Family::BBVeeEq,
    Family::SigmaNeqInf,
    Family::BBInf3,
];

impl Family {
    pub fn alias(self) -> &'static str {
        match self {
            Family::Geq => "T_geq",
            Family::EvenInf => "T_even_inf",
            Family::Inf => "T_inf",
            Family::NInf => "T_n_inf",
            Family::Leq => "T_leq",
            Family::Mn => "T_mn",
            Family::T23 => "T_23",
            Family::TwoInf => "T_2_inf",
            Family::OneOdd => "T_1_odd",
            Family::OneInf => "T_1_inf",
            Family::F => "T_f",
            Family::FS => "T_f_s",
            Family::Neq2Inf => "T_neq_2inf",
            Family::NeqOdd => "T_neq_odd",
            Family::Neq1Inf => "T_neq_1inf",
            Family::UpInf => "T_upinf",
            Family::MnInf => "T_mn_inf",
            Family::InfNeq => "T_inf_neq",
            Family::T233 => "T_23_3",
            Family::Sigma => "T_sigma",
            Family::SigmaInf => "T_sigma_inf",
            Family::NSigma => "T_n_sigma",
            Family::MnBB => "T_mn_BB",
            Family::BBS => "T_BB_s",
            Family::BBNeq => "T_BB_neq",
            Family::BB1Neq => "T_BB1_neq",
            Family::BBVee => "T_BB_vee",
            Family::BBEq => "T_BB_eq",
            Family::BB2 => "T_BB2",
            Family::BBVeeEq => "T_BBvee_eq",
            Family::SigmaNeqInf => "T_sigmaneq_inf",
            Family::BBInf3 => "T_BB_inf3",
        }
    }

    pub fn by_alias(alias: &str) -> Option<Family> {
        ALL_FAMILIES.iter().copied().find(|f| f.alias() == alias)
    }

    pub fn signature(self) -> Signature {
        use Family::*;
        match self {
            Geq | EvenInf | Inf | NInf | Leq | Mn | Sigma => Signature::Sigma1,
            T23 | TwoInf | OneOdd | OneInf | UpInf | MnInf | SigmaInf | NSigma | MnBB => {
                Signature::Sigma2
            }
            F | FS | Neq2Inf | NeqOdd | Neq1Inf | BBS | BBNeq | BB1Neq | BBVee => Signature::SigmaS,
            InfNeq | BBEq | BB2 | BBVeeEq | SigmaNeqInf => Signature::SigmaS2,
            T233 | BBInf3 => Signature::Sigma3,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            Family::Geq | Family::NInf | Family::Leq | Family::NSigma => 1,
            Family::Mn | Family::MnInf | Family::MnBB => 2,
            _ => 0,
        }
    }

    /// Default parameters used by catalog listings and the table.
    pub fn default_params(self) -> Vec<u64> {
        match self.param_count() {
            1 => vec![2],
            2 => vec![5, 2],
            _ => Vec::new(),
        }
    }

    pub fn validate_params(self, params: &[u64]) -> Result<(), CatalogError> {
        let fam = self.alias().to_string();
        if params.len() != self.param_count() {
            return Err(CatalogError::BadArity {
                family: fam,
                expected: self.param_count(),
                got: params.len(),
            });
        }
        match self {
            Family::Geq | Family::NInf | Family::Leq | Family::NSigma => {
                if params[0] == 0 {
                    return Err(CatalogError::BadParams {
                        family: fam,
                        msg: "parameter must be positive".into(),
                    });
                }
            }
            Family::Mn | Family::MnInf | Family::MnBB => {
                let (m, n) = (params[0], params[1]);
                if m == 0 || n == 0 {
                    return Err(CatalogError::BadParams {
                        family: fam,
                        msg: "parameters must be positive".into(),
                    });
                }
                if m == n {
                    return Err(CatalogError::BadParams {
                        family: fam,
                        msg: "parameters must be distinct".into(),
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn describe(self) -> &'static str {
        use Family::*;
        match self {
            Geq => "models with at least n elements",
            EvenInf => "finite models of even size, plus infinite models",
            Inf => "infinite models only",
            NInf => "models of size n, plus infinite models",
            Leq => "models with at most n elements",
            Mn => "models of size m or n",
            T23 => "sort one of size 2 with the second sort infinite, or both sorts of size >= 3",
            TwoInf => "sort one of size 2, second sort infinite",
            OneOdd => "sort one a singleton, second sort odd or infinite",
            OneInf => "sort one a singleton, second sort infinite",
            F => "fixed-point and non-fixed-point counts follow the balanced bit function",
            FS => "the bit-function theory with the psi-vee closure imposed",
            Neq2Inf => "two elements with s the identity, or infinite and s fixed-point-free",
            NeqOdd => "a singleton, or odd/infinite size with s fixed-point-free",
            Neq1Inf => "a singleton, or infinite with s fixed-point-free",
            UpInf => "a singleton sort one with infinite second sort, or both sorts equal of size >= 2",
            MnInf => "sort one of max(m,n) with second sort free, or of min(m,n) with second sort infinite",
            InfNeq => "sort one a singleton with s the identity, or equal sorts of size >= 2 (or size 2 with infinite second sort) with s fixed-point-free",
            T233 => "the two-sorted 2/3 theory with a third singleton sort",
            Sigma => "finite sizes are growth-function values at arguments >= 2, plus infinite models",
            SigmaInf => "a singleton sort one with infinite second sort, or equal sorts sized by the growth function",
            NSigma => "sort one of size n, second sort sized by the growth function or infinite",
            MnBB => "sort one of min(m,n) with second sort infinite, or of max(m,n) with second sort a growth value or infinite",
            BBS => "every size k, with exactly inverse-growth(k) fixed points",
            BBNeq => "two elements with s fixed-point-free, or growth-value/infinite sizes with s the identity",
            BB1Neq => "a singleton, or growth-value/infinite sizes with s fixed-point-free",
            BBVee => "the fixed-point-counted growth theory with the psi-vee closure imposed",
            BBEq => "second sort at least the growth function of the fixed-point count",
            BB2 => "a singleton sort one with infinite second sort, or sort one >= 2 with the growth coupling",
            BBVeeEq => "the two-sorted growth coupling with the psi-vee closure imposed",
            SigmaNeqInf => "the growth diagonal with s fixed-point-free, plus singleton-sort-one models",
            BBInf3 => "the growth diagonal theory with a third singleton sort",
        }
    }
}

/// A base theory instance: family plus concrete parameters.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TheoryInstance {
    pub family: Family,
    pub params: Vec<u64>,
}

impl TheoryInstance {
    pub fn new(family: Family, params: Vec<u64>) -> Result<TheoryInstance, CatalogError> {
        family.validate_params(&params)?;
        Ok(TheoryInstance { family, params })
    }

    /// Parses `T_geq:2`, `T_mn:5,2`, `T_BB_s`, ...
    pub fn parse(name: &str) -> Result<TheoryInstance, CatalogError> {
        let (alias, params) = match name.split_once(':') {
            Some((a, p)) => {
                let params: Result<Vec<u64>, _> =
                    p.split(',').map(|x| x.trim().parse::<u64>()).collect();
                (
                    a,
                    params.map_err(|_| CatalogError::BadParams {
                        family: a.to_string(),
                        msg: format!("cannot parse parameters `{p}`"),
                    })?,
                )
            }
            None => (name, Vec::new()),
        };
        let family =
            Family::by_alias(alias).ok_or_else(|| CatalogError::UnknownTheory(alias.to_string()))?;
        let params = if params.is_empty() && family.param_count() > 0 {
            family.default_params()
        } else {
            params
        };
        TheoryInstance::new(family, params)
    }

    pub fn name(&self) -> String {
        if self.params.is_empty() {
            self.family.alias().to_string()
        } else {
            format!(
                "{}:{}",
                self.family.alias(),
                self.params.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
            )
        }
    }
}

impl fmt::Display for TheoryInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// The shared default bit function (seeded, dyadically balanced).
pub fn default_bits() -> Arc<BitFn> {
    use std::sync::OnceLock;
    static BITS: OnceLock<Arc<BitFn>> = OnceLock::new();
    BITS.get_or_init(|| Arc::new(BitFn::balanced(DEFAULT_BIT_SEED, BIT_LEN))).clone()
}

/// Compiles a base theory by name against the given oracle.
pub fn get_theory(name: &str, oracle: &Arc<GrowthOracle>) -> Result<TheorySpec, CatalogError> {
    let inst = TheoryInstance::parse(name)?;
    compile(&inst, oracle)
}

/// Compiles a base theory instance against the given oracle.
pub fn compile(inst: &TheoryInstance, oracle: &Arc<GrowthOracle>) -> Result<TheorySpec, CatalogError> {
    use Family::*;
    use MeasureConstraint::*;
    use MeasureSel::{Card, Fp};

    let sig = inst.family.signature();
    let p = |i: usize| inst.params[i];
    let clauses: Vec<ShapeClause> = match inst.family {
        Geq => vec![ShapeClause::new(vec![GeConst { measure: Card(0), n: p(0) }])],
        EvenInf => vec![ShapeClause::new(vec![FiniteParity { measure: Card(0), odd: false }])],
        Inf => vec![ShapeClause::new(vec![Infinite { measure: Card(0) }])],
        NInf => vec![
            ShapeClause::new(vec![EqConst { measure: Card(0), n: p(0) }]),
            ShapeClause::new(vec![Infinite { measure: Card(0) }]),
        ],
        Leq => vec![ShapeClause::new(vec![LeConst { measure: Card(0), n: p(0) }])],
        Mn => vec![
            ShapeClause::new(vec![EqConst { measure: Card(0), n: p(0) }]),
            ShapeClause::new(vec![EqConst { measure: Card(0), n: p(1) }]),
        ],
        T23 => vec![
            ShapeClause::new(vec![
                EqConst { measure: Card(0), n: 2 },
                Infinite { measure: Card(1) },
            ]),
            ShapeClause::new(vec![
                GeConst { measure: Card(0), n: 3 },
                GeConst { measure: Card(1), n: 3 },
            ]),
        ],
        TwoInf => vec![ShapeClause::new(vec![
            EqConst { measure: Card(0), n: 2 },
            Infinite { measure: Card(1) },
        ])],
        OneOdd => vec![ShapeClause::new(vec![
            EqConst { measure: Card(0), n: 1 },
            FiniteParity { measure: Card(1), odd: true },
        ])],
        OneInf => vec![ShapeClause::new(vec![
            EqConst { measure: Card(0), n: 1 },
            Infinite { measure: Card(1) },
        ])],
        F => vec![ShapeClause::new(vec![BitCountOf { measure: Fp, of: Card(0) }])],
        FS => vec![ShapeClause::with_mode(
            vec![BitCountOf { measure: Fp, of: Card(0) }],
            SMode::PsiVee,
        )],
        Neq2Inf => vec![
            ShapeClause::with_mode(
                vec![EqConst { measure: Card(0), n: 2 }],
                SMode::IdentityEverywhere,
            ),
            ShapeClause::with_mode(vec![Infinite { measure: Card(0) }], SMode::FixpointFree),
        ],
        NeqOdd => vec![
            ShapeClause::new(vec![EqConst { measure: Card(0), n: 1 }]),
            ShapeClause::with_mode(
                vec![FiniteParity { measure: Card(0), odd: true }],
                SMode::FixpointFree,
            ),
        ],
        Neq1Inf => vec![
            ShapeClause::new(vec![EqConst { measure: Card(0), n: 1 }]),
            ShapeClause::with_mode(vec![Infinite { measure: Card(0) }], SMode::FixpointFree),
        ],
        UpInf => vec![
            ShapeClause::new(vec![
                EqConst { measure: Card(0), n: 1 },
                Infinite { measure: Card(1) },
            ]),
            ShapeClause::new(vec![
                EqMeasure { measure: Card(0), other: Card(1) },
                GeConst { measure: Card(0), n: 2 },
            ]),
        ],
        MnInf => {
            let hi = p(0).max(p(1));
            let lo = p(0).min(p(1));
            vec![
                ShapeClause::new(vec![EqConst { measure: Card(0), n: hi }]),
                ShapeClause::new(vec![
                    EqConst { measure: Card(0), n: lo },
                    Infinite { measure: Card(1) },
                ]),
            ]
        }
        InfNeq => vec![
            ShapeClause::new(vec![EqConst { measure: Card(0), n: 1 }]),
            ShapeClause::with_mode(
                vec![
                    EqMeasure { measure: Card(0), other: Card(1) },
                    GeConst { measure: Card(0), n: 2 },
                ],
                SMode::FixpointFree,
            ),
            ShapeClause::with_mode(
                vec![
                    EqConst { measure: Card(0), n: 2 },
                    Infinite { measure: Card(1) },
                ],
                SMode::FixpointFree,
            ),
        ],
        T233 => vec![
            ShapeClause::new(vec![
                EqConst { measure: Card(0), n: 2 },
                Infinite { measure: Card(1) },
                EqConst { measure: Card(2), n: 1 },
            ]),
            ShapeClause::new(vec![
                GeConst { measure: Card(0), n: 3 },
                GeConst { measure: Card(1), n: 3 },
                EqConst { measure: Card(2), n: 1 },
            ]),
        ],
        Sigma => vec![ShapeClause::new(vec![InSigmaImage { measure: Card(0), min_arg: 2 }])],
        SigmaInf => vec![
            ShapeClause::new(vec![
                EqConst { measure: Card(0), n: 1 },
                Infinite { measure: Card(1) },
            ]),
            ShapeClause::new(vec![
                EqMeasure { measure: Card(0), other: Card(1) },
                InSigmaImage { measure: Card(0), min_arg: 2 },
            ]),
        ],
        NSigma => vec![ShapeClause::new(vec![
            EqConst { measure: Card(0), n: p(0) },
            InSigmaImage { measure: Card(1), min_arg: 2 },
        ])],
        MnBB => {
            let hi = p(0).max(p(1));
            let lo = p(0).min(p(1));
            vec![
                ShapeClause::new(vec![
                    EqConst { measure: Card(0), n: lo },
                    Infinite { measure: Card(1) },
                ]),
                ShapeClause::new(vec![
                    EqConst { measure: Card(0), n: hi },
                    InSigmaImage { measure: Card(1), min_arg: 1 },
                ]),
            ]
        }
        BBS => vec![ShapeClause::new(vec![EqSigmaInv { measure: Fp, of: Card(0) }])],
        BBNeq => vec![
            ShapeClause::with_mode(
                vec![EqConst { measure: Card(0), n: 2 }],
                SMode::FixpointFree,
            ),
            ShapeClause::with_mode(
                vec![InSigmaImage { measure: Card(0), min_arg: 2 }],
                SMode::IdentityEverywhere,
            ),
        ],
        BB1Neq => vec![
            ShapeClause::new(vec![EqConst { measure: Card(0), n: 1 }]),
            ShapeClause::with_mode(
                vec![InSigmaImage { measure: Card(0), min_arg: 2 }],
                SMode::FixpointFree,
            ),
        ],
        BBVee => vec![ShapeClause::with_mode(
            vec![EqSigmaInv { measure: Fp, of: Card(0) }],
            SMode::PsiVee,
        )],
        BBEq => vec![ShapeClause::new(vec![GeSigmaOf { measure: Card(1), of: Fp }])],
        BB2 => vec![
            ShapeClause::new(vec![
                EqConst { measure: Card(0), n: 1 },
                Infinite { measure: Card(1) },
            ]),
            ShapeClause::new(vec![
                GeConst { measure: Card(0), n: 2 },
                GeSigmaOf { measure: Card(1), of: Fp },
            ]),
        ],
        BBVeeEq => vec![
            ShapeClause::with_mode(
                vec![
                    EqConst { measure: Card(0), n: 1 },
                    Infinite { measure: Card(1) },
                ],
                SMode::PsiVee,
            ),
            ShapeClause::with_mode(
                vec![
                    GeConst { measure: Card(0), n: 2 },
                    GeSigmaOf { measure: Card(1), of: Fp },
                ],
                SMode::PsiVee,
            ),
        ],
        SigmaNeqInf => vec![
            ShapeClause::new(vec![EqConst { measure: Card(0), n: 1 }]),
            ShapeClause::with_mode(
                vec![
                    EqMeasure { measure: Card(0), other: Card(1) },
                    InSigmaImage { measure: Card(0), min_arg: 2 },
                ],
                SMode::FixpointFree,
            ),
            ShapeClause::with_mode(
                vec![
                    EqConst { measure: Card(0), n: 2 },
                    Infinite { measure: Card(1) },
                ],
                SMode::FixpointFree,
            ),
        ],
        BBInf3 => vec![
            ShapeClause::new(vec![
                EqConst { measure: Card(0), n: 1 },
                Infinite { measure: Card(1) },
                EqConst { measure: Card(2), n: 1 },
            ]),
            ShapeClause::new(vec![
                EqMeasure { measure: Card(0), other: Card(1) },
                InSigmaImage { measure: Card(0), min_arg: 2 },
                EqConst { measure: Card(2), n: 1 },
            ]),
        ],
    };

    let mut spec = TheorySpec::new(inst.name(), sig, clauses, Arc::clone(oracle));
    if matches!(inst.family, F | FS) {
        spec = spec.with_bits(default_bits());
    }
    Ok(spec)
}

/// The k-th axiom instance(s) of a base theory, in schematic form. These are
/// the direct transcriptions of the axiomatizations; the compiled clause
/// form is validated against them by exhaustive evaluation of instances on
/// all small interpretations.
pub fn axiom_instances(inst: &TheoryInstance, k: u64) -> Vec<SchematicFormula> {
    use Family::*;
    use SchematicFormula::*;
    let p = |i: usize| inst.params[i];
    let bits = default_bits();
    let f1 = |k: u64| bits.ones_upto(k).expect("bit prefix long enough");
    let f0 = |k: u64| bits.zeros_upto(k).expect("bit prefix long enough");

    // diag(n): both sorts >= n, or exactly equal at some value in 2..=n
    let diag = |n: u64| -> SchematicFormula {
        let mut exact: Vec<SchematicFormula> = (2..=n)
            .map(|i| SAnd(vec![CardEq(0, i), CardEq(1, i)]))
            .collect();
        let mut alts = vec![SAnd(vec![CardGe(0, n), CardGe(1, n)])];
        alts.append(&mut exact);
        SOr(alts)
    };
    // diag_sigma(n): both sorts >= sigma(n), or both exactly sigma(i), 2<=i<=n
    let diag_sigma = |n: u64| -> SchematicFormula {
        let mut exact: Vec<SchematicFormula> = (2..=n)
            .map(|i| SAnd(vec![CardEqSigma(0, i), CardEqSigma(1, i)]))
            .collect();
        let mut alts = vec![SAnd(vec![CardGeSigma(0, n), CardGeSigma(1, n)])];
        alts.append(&mut exact);
        SOr(alts)
    };
    // growth ladder on one sort: >= sigma(n), or exactly sigma(i), lo<=i<=n
    let sigma_ladder = |sort: usize, lo: u64, n: u64| -> SchematicFormula {
        let mut alts = vec![CardGeSigma(sort, n)];
        alts.extend((lo..=n).map(|i| CardEqSigma(sort, i)));
        SOr(alts)
    };

    match inst.family {
        Geq => {
            if k == 0 {
                vec![CardGe(0, p(0))]
            } else {
                vec![]
            }
        }
        EvenInf => vec![SNot(Box::new(CardEq(0, 2 * k + 1)))],
        Inf => vec![CardGe(0, k)],
        NInf => vec![SOr(vec![CardEq(0, p(0)), CardGe(0, k)])],
        Leq => {
            if k == 0 {
                vec![CardLe(0, p(0))]
            } else {
                vec![]
            }
        }
        Mn => {
            if k == 0 {
                vec![SOr(vec![CardEq(0, p(0)), CardEq(0, p(1))])]
            } else {
                vec![]
            }
        }
        T23 => vec![SOr(vec![
            SAnd(vec![CardEq(0, 2), CardGe(1, k)]),
            SAnd(vec![CardGe(0, 3), CardGe(1, 3)]),
        ])],
        TwoInf => vec![CardEq(0, 2), CardGe(1, k)],
        OneOdd => vec![CardEq(0, 1), SNot(Box::new(CardEq(1, 2 * k)))],
        OneInf => vec![CardEq(0, 1), CardGe(1, k)],
        F | FS => {
            let mut out = Vec::new();
            if k >= 1 {
                let mut alts = vec![SAnd(vec![FpCardGe(f1(k)), NonFpCardGe(f0(k))])];
                alts.extend(
                    (1..=k).map(|i| SAnd(vec![FpCardEq(f1(i)), NonFpCardEq(f0(i))])),
                );
                out.push(SOr(alts));
            }
            if inst.family == FS && k == 0 {
                out.push(PsiVee);
            }
            out
        }
        Neq2Inf => vec![SOr(vec![
            SAnd(vec![CardEq(0, 2), AllFixed]),
            SAnd(vec![CardGe(0, k), NoneFixed]),
        ])],
        NeqOdd => vec![SOr(vec![
            CardEq(0, 1),
            SAnd(vec![SNot(Box::new(CardEq(0, 2 * k))), NoneFixed]),
        ])],
        Neq1Inf => vec![SOr(vec![CardEq(0, 1), SAnd(vec![CardGe(0, k), NoneFixed])])],
        UpInf => vec![SOr(vec![
            SAnd(vec![CardEq(0, 1), CardGe(1, k)]),
            diag(k + 2),
        ])],
        MnInf => {
            let hi = p(0).max(p(1));
            let lo = p(0).min(p(1));
            vec![SOr(vec![
                CardEq(0, hi),
                SAnd(vec![CardEq(0, lo), CardGe(1, k)]),
            ])]
        }
        InfNeq => vec![SOr(vec![
            CardEq(0, 1),
            SAnd(vec![diag(k + 2), NoneFixed]),
            SAnd(vec![CardEq(0, 2), CardGe(1, k), NoneFixed]),
        ])],
        T233 => vec![
            CardEq(2, 1),
            SOr(vec![
                SAnd(vec![CardEq(0, 2), CardGe(1, k)]),
                SAnd(vec![CardGe(0, 3), CardGe(1, 3)]),
            ]),
        ],
        Sigma => vec![sigma_ladder(0, 2, k + 2)],
        SigmaInf => vec![SOr(vec![
            SAnd(vec![CardEq(0, 1), CardGe(1, k)]),
            diag_sigma(k + 2),
        ])],
        NSigma => vec![CardEq(0, p(0)), sigma_ladder(1, 2, k + 2)],
        MnBB => {
            let hi = p(0).max(p(1));
            let lo = p(0).min(p(1));
            vec![SOr(vec![
                SAnd(vec![CardEq(0, lo), CardGe(1, k)]),
                SAnd(vec![CardEq(0, hi), sigma_ladder(1, 1, k + 1)]),
            ])]
        }
        BBS | BBVee => {
            let mut out = Vec::new();
            let mut alts = vec![SAnd(vec![CardGe(0, k + 1), FpCardGeSigmaInv(k + 1)])];
            alts.extend((1..=k + 1).map(|i| SAnd(vec![CardEq(0, i), FpCardEqSigmaInv(i)])));
            out.push(SOr(alts));
            if inst.family == BBVee && k == 0 {
                out.push(PsiVee);
            }
            out
        }
        BBNeq => vec![SOr(vec![
            SAnd(vec![CardEq(0, 2), NoneFixed]),
            SAnd(vec![sigma_ladder(0, 2, k + 2), AllFixed]),
        ])],
        BB1Neq => vec![SOr(vec![
            CardEq(0, 1),
            SAnd(vec![sigma_ladder(0, 2, k + 2), NoneFixed]),
        ])],
        BBEq => vec![SImplies(Box::new(FpCardGe(k + 2)), Box::new(CardGeSigma(1, k + 2)))],
        BB2 => vec![SOr(vec![
            SAnd(vec![CardEq(0, 1), CardGe(1, k)]),
            SAnd(vec![
                CardGe(0, 2),
                SImplies(Box::new(FpCardGe(k + 2)), Box::new(CardGeSigma(1, k + 2))),
            ]),
        ])],
        BBVeeEq => {
            let mut out = vec![SOr(vec![
                SAnd(vec![CardEq(0, 1), CardGe(1, k)]),
                SAnd(vec![
                    CardGe(0, 2),
                    SImplies(Box::new(FpCardGe(k + 2)), Box::new(CardGeSigma(1, k + 2))),
                ]),
            ])];
            if k == 0 {
                out.push(PsiVee);
            }
            out
        }
        SigmaNeqInf => vec![SOr(vec![
            CardEq(0, 1),
            SAnd(vec![diag_sigma(k + 2), NoneFixed]),
            SAnd(vec![CardEq(0, 2), CardGe(1, k), NoneFixed]),
        ])],
        BBInf3 => vec![
            CardEq(2, 1),
            SOr(vec![
                SAnd(vec![CardEq(0, 1), CardGe(1, k)]),
                diag_sigma(k + 2),
            ]),
        ],
    }
}

/// Listing entry for the CLI.
pub struct FamilyInfo {
    pub alias: &'static str,
    pub signature: Signature,
    pub params: usize,
    pub description: &'static str,
}

pub fn list_families() -> Vec<FamilyInfo> {
    ALL_FAMILIES
        .iter()
        .map(|f| FamilyInfo {
            alias: f.alias(),
            signature: f.signature(),
            params: f.param_count(),
            description: f.describe(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{Card, MeasureVector};

    fn oracle() -> Arc<GrowthOracle> {
        Arc::new(GrowthOracle::default())
    }

    #[test]
    fn parse_names() {
        assert_eq!(TheoryInstance::parse("T_geq:3").unwrap().params, vec![3]);
        assert_eq!(TheoryInstance::parse("T_mn:5,2").unwrap().params, vec![5, 2]);
        assert_eq!(TheoryInstance::parse("T_BB_s").unwrap().family, Family::BBS);
        assert!(TheoryInstance::parse("T_mn:3,3").is_err());
        assert!(TheoryInstance::parse("T_nope").is_err());
        // families with parameters fall back to documented defaults
        assert_eq!(TheoryInstance::parse("T_geq").unwrap().params, vec![2]);
    }

    #[test]
    fn t23_membership() {
        let o = oracle();
        let t = get_theory("T_23", &o).unwrap();
        let m = |a, b| MeasureVector::cards_only(vec![a, b]);
        // (2, 7) finite is not a model: the size-2 branch needs an infinite
        // second sort
        assert!(t.member(&m(Card::Fin(2), Card::Fin(7))).unwrap().is_false());
        assert!(t.member(&m(Card::Fin(2), Card::Inf)).unwrap().is_true());
        assert!(t.member(&m(Card::Fin(3), Card::Fin(3))).unwrap().is_true());
        assert!(t.member(&m(Card::Fin(1), Card::Fin(1))).unwrap().is_false());
    }

    #[test]
    fn sigma_theory_membership() {
        let o = oracle();
        let t = get_theory("T_sigma", &o).unwrap();
        let m = |v| MeasureVector::cards_only(vec![v]);
        assert!(t.member(&m(Card::Fin(4))).unwrap().is_true());
        assert!(t.member(&m(Card::Fin(5))).unwrap().is_false());
        assert!(t.member(&m(Card::Fin(13))).unwrap().is_true());
        assert!(t.member(&m(Card::Inf)).unwrap().is_true());
        // beyond the decidable range the answer is unknown
        assert!(t.member(&m(Card::Fin(5000))).unwrap().is_unknown());
    }

    #[test]
    fn bb_s_membership() {
        let o = oracle();
        let t = get_theory("T_BB_s", &o).unwrap();
        let m = |c, fp| MeasureVector {
            card: vec![c],
            fp: Some(fp),
            nonfp: None,
        };
        // size 3 needs exactly sigma_inv(3) = 1 fixed point
        assert!(t.member(&m(Card::Fin(3), Card::Fin(1))).unwrap().is_true());
        assert!(t.member(&m(Card::Fin(3), Card::Fin(2))).unwrap().is_false());
        assert!(t.member(&m(Card::Fin(4), Card::Fin(2))).unwrap().is_true());
        assert!(t.member(&m(Card::Inf, Card::Inf)).unwrap().is_true());
        assert!(t.member(&m(Card::Inf, Card::Fin(3))).unwrap().is_false());
    }

    #[test]
    fn bit_function_is_balanced() {
        let bits = default_bits();
        for k in 1..=12u32 {
            let n = 1u64 << k;
            if n > bits.len() {
                break;
            }
            assert_eq!(bits.ones_upto(n).unwrap(), n / 2, "balance at 2^{k}");
        }
    }

    #[test]
    fn spectrum_matches_axioms_small() {
        // quick version of the full cross-validation: every interpretation
        // with domains <= 3 must satisfy the compiled clauses exactly when
        // it satisfies every axiom instance
        let o = oracle();
        let bound = 3u64;
        let kmax = bound + 2;
        for family in ALL_FAMILIES {
            let inst = TheoryInstance::new(family, family.default_params()).unwrap();
            let t = compile(&inst, &o).unwrap();
            let sig = t.sig;
            let bounds = vec![bound; sig.sort_count()];
            for a in crate::interp::enumerate_interps(sig, &bounds, &[]) {
                let by_axioms = (0..=kmax).all(|k| {
                    axiom_instances(&inst, k)
                        .iter()
                        .all(|ax| a.eval_schematic(ax, &o).expect("decidable at desk scale"))
                });
                let by_spectrum = crate::interp::satisfies_theory(&a, &t);
                assert!(
                    !by_spectrum.is_unknown(),
                    "{}: unknown at sizes {:?}",
                    inst.name(),
                    a.sizes
                );
                assert_eq!(
                    by_spectrum.is_true(),
                    by_axioms,
                    "{}: mismatch at sizes {:?}, s={:?}",
                    inst.name(),
                    a.sizes,
                    a.s_map
                );
            }
        }
    }

    #[test]
    fn bbeq_membership_uses_growth_coupling() {
        let o = oracle();
        let t = get_theory("T_BB_eq", &o).unwrap();
        let m = |c1, fp, c2| MeasureVector { card: vec![c1, c2], fp: Some(fp), nonfp: None };
        // 2 fixed points force the second sort to at least sigma(2) = 4
        assert!(t.member(&m(Card::Fin(2), Card::Fin(2), Card::Fin(4))).unwrap().is_true());
        assert!(t.member(&m(Card::Fin(2), Card::Fin(2), Card::Fin(3))).unwrap().is_false());
        assert!(t.member(&m(Card::Fin(5), Card::Fin(1), Card::Fin(1))).unwrap().is_true());
        assert!(t.member(&m(Card::Inf, Card::Inf, Card::Inf)).unwrap().is_true());
        assert!(t.member(&m(Card::Inf, Card::Inf, Card::Fin(9))).unwrap().is_false());
    }
}
