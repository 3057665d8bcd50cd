//! File formats: law files, certificate records (JSON and CSV), fit and
//! search reports.
//!
//! Every real is written with 17 significant digits, which round-trips an
//! `f64` exactly. `+inf` is written as the string `"inf"` in both JSON and
//! CSV.

use std::io::{Read, Write};

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::definetti::Certificate;
use crate::error::{Error, Result};
use crate::exch::{Alphabet, ExchangeableLaw, TypeSpace, TypeVector};
use crate::optimizer::{FitResult, Improvement, SearchReport};
use crate::scalar::csum;

/// Normalization slack accepted when loading a law file.
pub const LOAD_TOLERANCE: f64 = 1e-9;

/// Decimal text of `x` with 17 significant digits, or `inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_infinite() && x > 0.0 {
        "inf".to_string()
    } else if x.is_infinite() {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_real(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| Error::InvalidArgument(format!("bad number {t:?}: {e}"))),
    }
}

/// An `f64` that serializes with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real17(pub f64);

impl Serialize for Real17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(fmt_real(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else if self.0.is_nan() {
            Err(serde::ser::Error::custom("NaN is not serializable"))
        } else {
            s.serialize_str(&fmt_real(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Real17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Real17(x)),
            Repr::Text(t) => parse_real(&t).map(Real17).map_err(de::Error::custom),
        }
    }
}

fn reals(xs: &[f64]) -> Vec<Real17> {
    xs.iter().copied().map(Real17).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeProb {
    pub counts: Vec<u32>,
    pub seq_prob: Real17,
}

/// On-disk form of an exchangeable law. Types not listed have probability 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawFile {
    pub alphabet_size: usize,
    pub n: usize,
    pub type_probs: Vec<TypeProb>,
}

impl LawFile {
    /// Lists every type of positive probability in lexicographic order.
    pub fn from_law(law: &ExchangeableLaw<f64>) -> Self {
        let type_probs = law
            .space()
            .types()
            .iter()
            .zip(law.seq_probs())
            .filter(|(_, &q)| q > 0.0)
            .map(|(t, &q)| TypeProb {
                counts: t.counts().to_vec(),
                seq_prob: Real17(q),
            })
            .collect();
        Self {
            alphabet_size: law.alphabet().size(),
            n: law.n(),
            type_probs,
        }
    }

    /// Validates the file and rescales it to unit mass.
    ///
    /// Rejects unknown or repeated types, negative or non-finite
    /// probabilities, and total mass further than [`LOAD_TOLERANCE`] from 1.
    pub fn to_law(&self) -> Result<ExchangeableLaw<f64>> {
        let alphabet = Alphabet::new(self.alphabet_size)?;
        let space = TypeSpace::new(alphabet, self.n)?;
        let mut q = vec![0.0; space.count()];
        let mut seen = vec![false; space.count()];
        for tp in &self.type_probs {
            let t = TypeVector::new(tp.counts.clone());
            let idx = space.index_of(&t).ok_or_else(|| {
                Error::InvalidLaw(format!(
                    "counts {:?} are not a type of length {} over {} symbols",
                    tp.counts, self.n, self.alphabet_size
                ))
            })?;
            if seen[idx] {
                return Err(Error::InvalidLaw(format!("type {:?} listed twice", tp.counts)));
            }
            seen[idx] = true;
            let p = tp.seq_prob.0;
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidLaw(format!(
                    "type {:?} has invalid probability {p}",
                    tp.counts
                )));
            }
            q[idx] = p;
        }
        let total = csum(
            q.iter()
                .zip(space.multiplicities())
                .map(|(&x, &m)| x * m as f64),
        );
        if (total - 1.0).abs() > LOAD_TOLERANCE {
            return Err(Error::InvalidLaw(format!(
                "type-class masses sum to {total}, not 1 (tolerance {LOAD_TOLERANCE})"
            )));
        }
        let q = q.into_iter().map(|x| x / total).collect();
        ExchangeableLaw::new(space, q)
    }
}

pub fn read_law(r: impl Read) -> Result<ExchangeableLaw<f64>> {
    let file: LawFile = serde_json::from_reader(r)?;
    file.to_law()
}

pub fn read_law_path(path: &std::path::Path) -> Result<ExchangeableLaw<f64>> {
    read_law(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn law_to_json(law: &ExchangeableLaw<f64>) -> Result<String> {
    to_json(&LawFile::from_law(law))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Units for information quantities in reports. Conversion is display only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn scale(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

/// Flat JSON form of a [`Certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub n: usize,
    pub k: usize,
    pub alphabet_size: usize,
    pub m_star: usize,
    #[serde(rename = "D")]
    pub d: Real17,
    pub thm_bound: Real17,
    #[serde(rename = "cor_bound_H")]
    pub cor_bound_h: Real17,
    #[serde(rename = "cor_bound_logA")]
    pub cor_bound_log_a: Real17,
    pub tv: Real17,
    pub pinsker_tv: Real17,
    pub df_tv_ref: Real17,
    pub first_bound: Option<Real17>,
    pub second_rate: Real17,
    pub second_rate_note: String,
    pub atom_count: usize,
    pub entropy_x1: Real17,
    pub mstar_value: Real17,
    pub cond_mi_average: Real17,
    pub units: String,
}

impl CertificateJson {
    pub fn new(c: &Certificate<f64>, units: Units) -> Self {
        let u = |x: f64| Real17(units.scale(x));
        Self {
            n: c.n,
            k: c.k,
            alphabet_size: c.alphabet_size,
            m_star: c.m_star,
            d: u(c.d),
            thm_bound: u(c.thm_bound),
            cor_bound_h: u(c.cor_bound_h),
            cor_bound_log_a: u(c.cor_bound_log_a),
            tv: Real17(c.tv),
            pinsker_tv: Real17(c.pinsker_tv),
            df_tv_ref: Real17(c.df_tv_ref),
            first_bound: c.first_bound.map(u),
            second_rate: u(c.second_rate),
            second_rate_note: "rate-only".to_string(),
            atom_count: c.atom_count,
            entropy_x1: u(c.entropy_x1),
            mstar_value: u(c.mstar_value),
            cond_mi_average: u(c.cond_mi_average),
            units: units.name().to_string(),
        }
    }
}

/// Fixed CSV column order for certificate rows.
pub const CSV_HEADER: [&str; 13] = [
    "n",
    "k",
    "m_star",
    "D",
    "thm_bound",
    "cor_bound_H",
    "cor_bound_logA",
    "tv",
    "pinsker_tv",
    "df_tv_ref",
    "first_bound",
    "second_rate",
    "atom_count",
];

/// One CSV row. `first_bound` is an empty field when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CertRow {
    pub n: usize,
    pub k: usize,
    pub m_star: usize,
    pub d: f64,
    pub thm_bound: f64,
    pub cor_bound_h: f64,
    pub cor_bound_log_a: f64,
    pub tv: f64,
    pub pinsker_tv: f64,
    pub df_tv_ref: f64,
    pub first_bound: Option<f64>,
    pub second_rate: f64,
    pub atom_count: usize,
}

impl CertRow {
    pub fn new(c: &Certificate<f64>, units: Units) -> Self {
        Self {
            n: c.n,
            k: c.k,
            m_star: c.m_star,
            d: units.scale(c.d),
            thm_bound: units.scale(c.thm_bound),
            cor_bound_h: units.scale(c.cor_bound_h),
            cor_bound_log_a: units.scale(c.cor_bound_log_a),
            tv: c.tv,
            pinsker_tv: c.pinsker_tv,
            df_tv_ref: c.df_tv_ref,
            first_bound: c.first_bound.map(|x| units.scale(x)),
            second_rate: units.scale(c.second_rate),
            atom_count: c.atom_count,
        }
    }

    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.m_star.to_string(),
            fmt_real(self.d),
            fmt_real(self.thm_bound),
            fmt_real(self.cor_bound_h),
            fmt_real(self.cor_bound_log_a),
            fmt_real(self.tv),
            fmt_real(self.pinsker_tv),
            fmt_real(self.df_tv_ref),
            self.first_bound.map(fmt_real).unwrap_or_default(),
            fmt_real(self.second_rate),
            self.atom_count.to_string(),
        ]
    }

    pub fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::InvalidArgument(format!(
                "certificate row has {} fields, expected {}",
                rec.len(),
                CSV_HEADER.len()
            )));
        }
        let int = |i: usize| -> Result<usize> {
            rec[i]
                .parse()
                .map_err(|e| Error::InvalidArgument(format!("bad integer {:?}: {e}", &rec[i])))
        };
        let real = |i: usize| parse_real(&rec[i]);
        Ok(Self {
            n: int(0)?,
            k: int(1)?,
            m_star: int(2)?,
            d: real(3)?,
            thm_bound: real(4)?,
            cor_bound_h: real(5)?,
            cor_bound_log_a: real(6)?,
            tv: real(7)?,
            pinsker_tv: real(8)?,
            df_tv_ref: real(9)?,
            first_bound: if rec[10].is_empty() {
                None
            } else {
                Some(real(10)?)
            },
            second_rate: real(11)?,
            atom_count: int(12)?,
        })
    }
}

/// Writes the header and one line per row.
pub fn write_csv(rows: &[CertRow], w: impl Write) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for row in rows {
        wtr.write_record(row.to_record())?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<Vec<CertRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::InvalidArgument(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    rdr.records()
        .map(|rec| CertRow::from_record(&rec?))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FitJson {
    pub weights: Vec<Real17>,
    #[serde(rename = "D")]
    pub d: Real17,
    pub iterations: usize,
    pub converged: bool,
    pub gap_bound: Real17,
    pub trace: Vec<Real17>,
}

impl FitJson {
    pub fn new(fit: &FitResult<f64>, units: Units) -> Self {
        let trace: Vec<f64> = fit.trace.iter().map(|&x| units.scale(x)).collect();
        Self {
            weights: reals(&fit.weights),
            d: Real17(units.scale(fit.d.value())),
            iterations: fit.iterations,
            converged: fit.converged,
            gap_bound: Real17(units.scale(fit.gap_bound)),
            trace: reals(&trace),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImprovementJson {
    pub certificate: CertificateJson,
    #[serde(rename = "D_fit")]
    pub d_fit: Real17,
    pub constructed_atoms: usize,
    pub components: Vec<Vec<Real17>>,
    pub fit: FitJson,
}

impl ImprovementJson {
    pub fn new(imp: &Improvement<f64>, units: Units) -> Self {
        Self {
            certificate: CertificateJson::new(&imp.certificate, units),
            d_fit: Real17(units.scale(imp.fit.d.value())),
            constructed_atoms: imp.constructed_atoms,
            components: imp.components.iter().map(|c| reals(c.probs())).collect(),
            fit: FitJson::new(&imp.fit, units),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchJson {
    pub seed: u64,
    pub restarts: usize,
    pub steps: usize,
    pub best_ratio: Real17,
    pub best_restart: usize,
    pub restart_ratios: Vec<Real17>,
    pub laws_visited: usize,
    pub note: String,
    pub certificate: CertificateJson,
    pub best_law: LawFile,
}

impl SearchJson {
    pub fn new(rep: &SearchReport<f64>, units: Units) -> Self {
        Self {
            seed: rep.seed,
            restarts: rep.restarts,
            steps: rep.steps,
            best_ratio: Real17(rep.best_ratio),
            best_restart: rep.best_restart,
            restart_ratios: reals(&rep.restart_ratios),
            laws_visited: rep.laws_visited,
            note: "heuristic search: best_ratio is a lower bound on the worst case".to_string(),
            certificate: CertificateJson::new(&rep.certificate, units),
            best_law: LawFile::from_law(&rep.best_law),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definetti::certify;
    use crate::generators::polya;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(f64::INFINITY), "inf");
        assert_eq!(parse_real("1.0000000000000001e-1").unwrap(), 0.1);
        assert_eq!(parse_real("inf").unwrap(), f64::INFINITY);
    }

    #[test]
    fn real17_json() {
        let s = serde_json::to_string(&vec![Real17(0.5), Real17(f64::INFINITY)]).unwrap();
        assert_eq!(s, r#"[5.0000000000000000e-1,"inf"]"#);
        let back: Vec<Real17> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Real17(0.5), Real17(f64::INFINITY)]);
    }

    #[test]
    fn law_file_round_trip() {
        let law = polya::<f64>(&[1, 2], 4).unwrap();
        let text = law_to_json(&law).unwrap();
        let back = read_law(text.as_bytes()).unwrap();
        assert_eq!(back, law);
        assert_eq!(law_to_json(&back).unwrap(), text);
    }

    #[test]
    fn loader_rejects_bad_files() {
        let bad_mass = r#"{"alphabet_size":2,"n":1,"type_probs":[{"counts":[1,0],"seq_prob":0.6}]}"#;
        assert!(matches!(read_law(bad_mass.as_bytes()), Err(Error::InvalidLaw(_))));
        let dup = r#"{"alphabet_size":2,"n":1,"type_probs":[{"counts":[1,0],"seq_prob":0.5},{"counts":[1,0],"seq_prob":0.5}]}"#;
        assert!(read_law(dup.as_bytes()).is_err());
        let shape = r#"{"alphabet_size":2,"n":1,"type_probs":[{"counts":[1,1],"seq_prob":1.0}]}"#;
        assert!(read_law(shape.as_bytes()).is_err());
        let neg = r#"{"alphabet_size":2,"n":1,"type_probs":[{"counts":[1,0],"seq_prob":1.5},{"counts":[0,1],"seq_prob":-0.5}]}"#;
        assert!(read_law(neg.as_bytes()).is_err());
        // Omitted types are zero; slightly off mass is rescaled.
        let ok = r#"{"alphabet_size":2,"n":1,"type_probs":[{"counts":[1,0],"seq_prob":1.0000000001}]}"#;
        let law = read_law(ok.as_bytes()).unwrap();
        assert_eq!(law.seq_probs(), &[0.0, 1.0]);
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let law = polya::<f64>(&[1, 1], 6).unwrap();
        let rows: Vec<_> = (1..6)
            .map(|k| CertRow::new(&certify(&law, k).unwrap(), Units::Nats))
            .collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let parsed = read_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed, rows);
        let mut again = Vec::new();
        write_csv(&parsed, &mut again).unwrap();
        assert_eq!(buf, again);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,k,m_star,D,thm_bound,cor_bound_H,cor_bound_logA,tv,pinsker_tv,df_tv_ref,first_bound,second_rate,atom_count\n"));
    }

    #[test]
    fn certificate_json_is_flat() {
        let c = certify(&polya::<f64>(&[1, 1, 1], 4).unwrap(), 2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&to_json(&CertificateJson::new(&c, Units::Nats)).unwrap()).unwrap();
        assert!(v["first_bound"].is_null());
        assert_eq!(v["k"], 2);
        assert!(v["D"].is_number());
        let bits = CertificateJson::new(&c, Units::Bits);
        assert!((bits.cor_bound_log_a.0 - c.cor_bound_log_a / std::f64::consts::LN_2).abs() < 1e-15);
    }
}
