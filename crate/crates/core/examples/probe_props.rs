use combicheck::catalog::get_theory;
use combicheck::decide::Bounds;
use combicheck::oracle::GrowthOracle;
use combicheck::props::{check_property, CheckMode, Property};
use std::sync::Arc;

fn main() {
    let o = Arc::new(GrowthOracle::default());
    let bounds = Bounds::default();
    let cases = [
        ("T_geq:2", "TT.T.TT"),
        ("T_even_inf", "TF.T.TT"),
        ("T_inf", "TT.T.FF"),
        ("T_n_inf:2", "TF.T.FF"),
        ("T_leq:1", "FF.T.TT"),
        ("T_leq:2", "FF.F.TT"),
        ("T_mn:5,2", "FF.F.TT"),
        ("T_23", "TT.T.TF"),
        ("T_2_inf", "FF.F.FF"),
        ("T_1_odd", "FF.T.TT"),
        ("T_1_inf", "FF.T.FF"),
        ("T_f", "TT.T.TT"),
        ("T_f_s", "TT.F.TT"),
        ("T_neq_2inf", "FF.F.FF"),
        ("T_neq_odd", "FF.T.TT"),
        ("T_neq_1inf", "FF.T.FF"),
        ("T_upinf", "TF.T.TF"),
        ("T_mn_inf:5,2", "FF.F.TF"),
        ("T_inf_neq", "FF.T.TF"),
        ("T_23_3", "FF.T.TF"),
        ("T_sigma", "TF.T.TT"),
        ("T_sigma_inf", "TF.T.TF"),
        ("T_n_sigma:1", "FF.T.TT"),
        ("T_n_sigma:2", "FF.F.TT"),
        ("T_mn_BB:5,2", "FF.F.TF"),
        ("T_BB_s", "TT.T.TT"),
        ("T_BB_neq", "FF.F.TT"),
        ("T_BB1_neq", "FF.T.TT"),
        ("T_BB_vee", "TT.F.TT"),
        ("T_BB_eq", "TT.T.TT"),
        ("T_BB2", "TT.T.TF"),
        ("T_BBvee_eq", "TT.F.TF"),
        ("T_sigmaneq_inf", "FF.T.TF"),
        ("T_BB_inf3", "FF.T.TF"),
    ];
    let mut bad = 0;
    for (name, expect) in cases {
        let t = get_theory(name, &o).unwrap();
        let si = check_property(&t, Property::Si, CheckMode::ExactSpectrum, &bounds);
        let sm = check_property(&t, Property::Sm, CheckMode::ExactSpectrum, &bounds);
        let cv = check_property(&t, Property::Cv, CheckMode::Corpus, &bounds);
        let fm = check_property(&t, Property::Fm, CheckMode::ExactSpectrum, &bounds);
        let sf = check_property(&t, Property::Sf, CheckMode::ExactSpectrum, &bounds);
        let got: String = [si.verdict, sm.verdict]
            .iter()
            .map(|v| v.to_string())
            .chain(std::iter::once(".".to_string()))
            .chain(std::iter::once(cv.verdict.to_string()))
            .chain(std::iter::once(".".to_string()))
            .chain([fm.verdict, sf.verdict].iter().map(|v| v.to_string()))
            .collect();
        let status = if got == expect { "ok " } else { bad += 1; "BAD" };
        println!("{status} {name:18} expect {expect} got {got}");
        if got != expect {
            for r in [&si, &sm, &cv, &fm, &sf] {
                if let Some(e) = &r.evidence {
                    println!("      {}: {}", r.property, e);
                }
            }
        }
    }
    println!("\n{bad} mismatches");
}
