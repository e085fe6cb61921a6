//! Browser bindings. Each export returns plain text for a `<pre>` block.

use std::fmt::Write;

use wasm_bindgen::prelude::*;

use handlesplit::generate::{generate, GeneratorSpec};
use handlesplit::io::{serialize_datum, serialize_decomposition, serialize_script};
use handlesplit::value::ratio;
use handlesplit::{dimension_profile, generic_disjoint, global_split, Ambient, CriticalPoint, Kind};

const NAMES: [&str; 6] = ["Ms-Omega", "Mu-Omega", "Ws-Y", "Wu-Y", "Ws_Y", "Wu_Y"];

pub fn profile_text(kind: &str, k: u32, n: u32) -> Result<String, String> {
    let kind = Kind::parse(kind).ok_or_else(|| format!("unknown kind `{kind}`"))?;
    let p = dimension_profile(kind, k, n).map_err(|e| e.to_string())?;
    let mut s = String::new();
    for (name, dim) in NAMES.iter().zip(p.as_array()) {
        match dim {
            Some(d) => writeln!(s, "{name:<9}{d}").unwrap(),
            None => writeln!(s, "{name:<9}empty").unwrap(),
        }
    }
    Ok(s)
}

/// Rows are sources, columns targets; `.` marks pairs genericity keeps
/// apart, `x` pairs that may be joined by a trajectory.
pub fn grid_text(n: u32, m: u32) -> Result<String, String> {
    let amb = Ambient::new(m, n).map_err(|e| e.to_string())?;
    let labels: Vec<(Kind, u32)> = Kind::ALL
        .iter()
        .flat_map(|&kind| kind.index_range(n).map(move |k| (kind, k)))
        .collect();
    let short = |(kind, k): (Kind, u32)| {
        let c = match kind {
            Kind::Interior => 'I',
            Kind::BoundaryStable => 'S',
            Kind::BoundaryUnstable => 'U',
        };
        format!("{c}{k}")
    };
    let mut s = String::from("     ");
    for &l in &labels {
        write!(s, "{:>4}", short(l)).unwrap();
    }
    s.push('\n');
    for &(kz, k) in &labels {
        write!(s, "{:>4} ", short((kz, k))).unwrap();
        let z = CriticalPoint::new(0, kz, k, ratio(1, 2));
        for &(kw, l) in &labels {
            let w = CriticalPoint::new(1, kw, l, ratio(1, 2));
            let mark = if generic_disjoint(&z, &w, amb) { '.' } else { 'x' };
            write!(s, "{mark:>4}").unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn normal_form_text(seed: u64, n: u32, m: u32, max_points: usize) -> Result<String, String> {
    let d = generate(&GeneratorSpec::new(seed, n, m, max_points)).map_err(|e| e.to_string())?;
    let (out, dec, script) = global_split(&d).map_err(|e| e.to_string())?;
    Ok(format!(
        "# input\n{}\n# script\n{}\n# normal form\n{}\n# decomposition\n{}",
        serialize_datum(&d),
        serialize_script(&script),
        serialize_datum(&out),
        serialize_decomposition(&dec)
    ))
}

#[wasm_bindgen]
pub fn profile(kind: &str, k: u32, n: u32) -> Result<String, JsValue> {
    profile_text(kind, k, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn disjointness_grid(n: u32, m: u32) -> Result<String, JsValue> {
    grid_text(n, m).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn normal_form(seed: u32, n: u32, m: u32, max_points: u32) -> Result<String, JsValue> {
    normal_form_text(u64::from(seed), n, m, max_points as usize).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_lists_six_dimensions() {
        let s = profile_text("interior", 1, 2).unwrap();
        assert_eq!(s.lines().count(), 6);
        assert!(s.contains("Ws_Y     empty"));
        assert!(profile_text("bstable", 0, 2).is_err());
        assert!(profile_text("nope", 0, 2).is_err());
    }

    #[test]
    fn grid_is_square() {
        let s = grid_text(1, 3).unwrap();
        // 3 + 2 + 2 labels plus the header row.
        assert_eq!(s.lines().count(), 8);
        assert!(s.lines().skip(1).all(|l| l.len() == 5 + 4 * 7));
        assert!(grid_text(2, 2).is_err());
    }

    #[test]
    fn normal_form_reports_every_section() {
        let s = normal_form_text(3, 2, 4, 6).unwrap();
        for head in ["# input", "# script", "# normal form", "# decomposition"] {
            assert!(s.contains(head), "{s}");
        }
    }
}
