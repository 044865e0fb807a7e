//! Rendering of classification results: versioned JSON, a fixed-column
//! CSV of per-line verdicts, and a human-readable text summary.

use asm_galois_core::aut::GroupType;
use asm_galois_core::galois::Classification;

use crate::driver::{CensusSection, DriverError, LineVerdict, Report, SectionShape};

pub fn group_type_label(g: &GroupType) -> &'static str {
    match g {
        GroupType::Trivial => "trivial",
        GroupType::AdditiveFq => "additive",
        GroupType::FqSemiC2 => "additive-semidirect-c2",
        GroupType::FqStarSemiC2 => "multiplicative-semidirect-c2",
        GroupType::Other { .. } => "other",
    }
}

pub fn classification_label(c: Classification) -> &'static str {
    match c {
        Classification::TypeAThroughCenter => "type-a-through-center",
        Classification::TypeAAvoidingCenter => "type-a-avoiding-center",
        Classification::TypeB => "type-b",
        Classification::TangentTypeB => "tangent-type-b",
        Classification::NonGalois => "non-galois",
    }
}

fn coeffs_label(v: &[u64; 4]) -> String {
    v.map(|c| c.to_string()).join(":")
}

/// Stable JSON with a schema version; trailing newline so files diff well.
pub fn to_json(report: &Report) -> Result<String, DriverError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| DriverError::BadSpec {
        what: "report serialization",
        detail: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

fn csv_row(out: &mut String, v: &LineVerdict) {
    out.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        coeffs_label(&v.h1),
        coeffs_label(&v.h2),
        v.degree,
        v.stab_order,
        group_type_label(&v.group_type),
        v.is_galois,
        classification_label(v.classification),
    ));
}

/// One row per analyzed line across all sections, fixed columns.
pub fn to_csv(report: &Report) -> String {
    let mut out =
        String::from("line_h1,line_h2,degree,stab_order,group_type,is_galois,classification\n");
    for row in &report.census.rows {
        csv_row(&mut out, row);
    }
    for row in &report.rulings.rows {
        csv_row(&mut out, &row.verdict);
    }
    for row in &report.negatives.rows {
        csv_row(&mut out, &row.verdict);
    }
    out
}

/// Closing line of a census: the split of the plane's lines by family.
pub fn census_summary(q: u64, census: &CensusSection) -> String {
    let (a, b, r) = census.counts.as_tuple();
    format!(
        "{} + {} + {} = {} lines, all Galois; counts match the expected split (q-1, q^2, 2) for q = {}",
        a,
        b,
        r,
        census.counts.total(),
        q
    )
}

pub fn census_text(q: u64, c: u64, census: &CensusSection) -> String {
    let mut out = format!(
        "Lines of the plane at infinity over F_{} (curve constant c = {}):\n",
        q, c
    );
    out.push_str("  h1          h2          degree  |stab|  group                          class\n");
    for row in &census.rows {
        out.push_str(&format!(
            "  {:<11} {:<11} {:<7} {:<7} {:<30} {}\n",
            coeffs_label(&row.h1),
            coeffs_label(&row.h2),
            row.degree,
            row.stab_order,
            group_type_label(&row.group_type),
            classification_label(row.classification),
        ));
    }
    out.push_str(&census_summary(q, census));
    out.push('\n');
    out
}

pub fn to_text(report: &Report) -> String {
    let p = &report.params;
    let mut out = format!(
        "asm-galois report (schema {})\nq = {} (p = {}, e = {}), c = {}, seed = {}, version {}\n\n",
        report.schema, p.q, p.p, p.e, p.c, p.seed, p.tool_version
    );
    out.push_str(&census_text(p.q, p.c, &report.census));

    let rulings = &report.rulings;
    out.push_str(&format!(
        "\nRuling scan: {} lines over {} parameters, all as expected: {}\n",
        rulings.rows.len(),
        rulings.rows.len() / 2,
        rulings.all_expected
    ));

    let negatives = &report.negatives;
    out.push_str(&format!(
        "Negative scan: {} lines outside the known families (seed {}), all non-Galois\n",
        negatives.rows.len(),
        negatives.seed
    ));

    let coll = &report.collinearity;
    let tangents = coll
        .rows
        .iter()
        .filter(|r| r.shape == SectionShape::Tangent)
        .count();
    out.push_str(&format!(
        "Section collinearity: {} parameters ({} tangent), all on the predicted line: {}\n",
        coll.rows.len(),
        tangents,
        coll.all_ok
    ));

    let props = &report.properties;
    out.push_str(&format!(
        "Properties: |Aut| = {} (expected: {}), faithful at infinity: {}, \
         {} order gaps (ok: {}), {} oracle pairs (agree: {}), {} fibers (ok: {})\n",
        props.aut_order,
        props.aut_order_expected,
        props.aut_faithful_on_infinity,
        props.gap_orders_checked,
        props.gap_orders_ok,
        props.oracle_pairs_checked,
        props.oracle_pairs_agree,
        props.fibers_checked,
        props.fibers_ok
    ));

    if let Some(t) = &report.timing {
        out.push_str(&format!(
            "Timing: census {} ms, rulings {} ms, negatives {} ms, total {} ms\n",
            t.census_ms, t.rulings_ms, t.negatives_ms, t.total_ms
        ));
    }
    out
}
