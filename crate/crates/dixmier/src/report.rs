//! Report structures and their text, JSON and CSV renderings.

use std::collections::BTreeSet;
use std::fmt::Write;

use dixmier_core::averaging::TraceRow;
use dixmier_core::rep::NormEstimate;
use dixmier_core::structure::{
    BijectionReport, OrbitDecomposition, TraceReport, ABSENT_HYPOTHESIS,
};
use dixmier_core::twist::AxiomCheck;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidateReport {
    pub system: String,
    pub valid: bool,
    pub checks: Vec<AxiomCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub system: String,
    pub element: String,
    pub window: String,
    pub window_size: usize,
    pub guard: usize,
    #[serde(flatten)]
    pub estimate: NormEstimate,
    pub l1_upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageReport {
    pub system: String,
    pub element: String,
    pub mode: String,
    pub process_length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps_for_epsilon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_bound: Option<f64>,
    pub refuted: bool,
    pub rows: Vec<TraceRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealRow {
    pub ideal: BTreeSet<usize>,
    pub generated: BTreeSet<usize>,
    pub tilde: BTreeSet<usize>,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealsReport {
    pub system: String,
    pub invariant_ideals: Vec<IdealRow>,
    pub exact: bool,
    pub maximal_ideals: usize,
    pub maximal_invariant_ideals: usize,
    pub bijection: BijectionReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct TracesReport {
    pub system: String,
    #[serde(flatten)]
    pub traces: TraceReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockRow {
    pub dim: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecomposeReport {
    pub system: String,
    pub ambient: usize,
    pub dimension: usize,
    pub faithfulness_margin: f64,
    pub blocks: Vec<BlockRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbits: Option<OrbitDecomposition>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub validate: ValidateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideals: Option<IdealsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<TracesReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub norms: Vec<NormReport>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Validate(ValidateReport),
    Norm(NormReport),
    Average(AverageReport),
    Ideals(IdealsReport),
    Traces(TracesReport),
    Decompose(DecomposeReport),
    Full(Box<FullReport>),
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "YES"
    } else {
        "NO"
    }
}

fn set(s: &BTreeSet<usize>) -> String {
    let items: Vec<String> = s.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(","))
}

impl ValidateReport {
    fn text(&self, out: &mut String) {
        writeln!(out, "system: {}", self.system).unwrap();
        for c in &self.checks {
            let mode = if c.exhaustive {
                "exhaustive"
            } else {
                "sampled"
            };
            write!(
                out,
                "  [{}] {} ({} cases, {mode}, max defect {:.3e})",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.cases,
                c.max_defect
            )
            .unwrap();
            if let Some(w) = &c.witness {
                write!(out, " witness ({})", w.join(", ")).unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "valid: {}", yes_no(self.valid)).unwrap();
    }
}

impl NormReport {
    fn text(&self, out: &mut String) {
        writeln!(out, "element: {}", self.element).unwrap();
        writeln!(
            out,
            "  window: {} ({} elements, guard {})",
            self.window, self.window_size, self.guard
        )
        .unwrap();
        writeln!(
            out,
            "  norm lower bound: {:.12} ({} iterations, converged {}, residual {:.3e}, compressed {})",
            self.estimate.value,
            self.estimate.iterations,
            yes_no(self.estimate.converged),
            self.estimate.residual,
            yes_no(self.estimate.compressed)
        )
        .unwrap();
        writeln!(out, "  l1 upper bound: {:.12}", self.l1_upper).unwrap();
    }
}

impl AverageReport {
    fn text(&self, out: &mut String) {
        writeln!(out, "element: {} ({} averaging)", self.element, self.mode).unwrap();
        writeln!(
            out,
            "  {:>5} {:>7} {:>16} {:>16} {:>16}",
            "step", "terms", "norm_lower", "l1_upper", "certified"
        )
        .unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "  {:>5} {:>7} {:>16.12} {:>16.12} {:>16.12}",
                r.step, r.terms, r.norm_lower, r.l1_upper, r.certified_bound
            )
            .unwrap();
        }
        writeln!(out, "  symbolic steps: {}", self.process_length).unwrap();
        if let (Some(k), Some(b)) = (self.steps_for_epsilon, self.final_bound) {
            writeln!(out, "  steps for epsilon: {k} (certified bound {b:.6e})").unwrap();
        }
        writeln!(
            out,
            "  refutation: {}",
            if self.refuted {
                "YES (certified bound violated)"
            } else {
                "none"
            }
        )
        .unwrap();
    }
}

impl IdealsReport {
    pub fn summary(&self) -> String {
        let b = &self.bijection;
        let verdict = if b.bijection {
            "YES".to_owned()
        } else {
            format!("NO ({ABSENT_HYPOTHESIS})")
        };
        format!(
            "maximal ideals: {}; maximal invariant ideals of A: {}; bijection: {verdict}",
            self.maximal_ideals, self.maximal_invariant_ideals
        )
    }

    fn text(&self, out: &mut String) {
        writeln!(out, "system: {}", self.system).unwrap();
        writeln!(
            out,
            "invariant ideals of A (by blocks of A -> blocks of the model):"
        )
        .unwrap();
        for r in &self.invariant_ideals {
            writeln!(
                out,
                "  J = {}: <J> = {}, J~ = {}, equal {}",
                set(&r.ideal),
                set(&r.generated),
                set(&r.tilde),
                yes_no(r.equal)
            )
            .unwrap();
        }
        writeln!(out, "exact: {}", yes_no(self.exact)).unwrap();
        writeln!(out, "{}", self.summary()).unwrap();
        if let Some(e) = &self.bijection.explanation {
            writeln!(out, "note: {e}").unwrap();
        }
    }
}

impl TracesReport {
    fn text(&self, out: &mut String) {
        let t = &self.traces;
        writeln!(out, "system: {}", self.system).unwrap();
        writeln!(
            out,
            "extreme invariant traces of A: {}",
            t.invariant_traces.len()
        )
        .unwrap();
        for (phi, w) in t.invariant_traces.iter().zip(&t.image_weights) {
            writeln!(
                out,
                "  phi {:?} -> phi.E on model blocks {:?}",
                phi.weights, w
            )
            .unwrap();
        }
        writeln!(out, "extreme traces of the model: {}", t.model_traces).unwrap();
        writeln!(
            out,
            "tracial defect: {:.3e}; extension defect: {:.3e}",
            t.tracial_defect, t.extension_defect
        )
        .unwrap();
        writeln!(
            out,
            "injective: {}; surjective: {}",
            yes_no(t.injective),
            yes_no(t.surjective)
        )
        .unwrap();
    }
}

impl DecomposeReport {
    fn text(&self, out: &mut String) {
        writeln!(out, "system: {}", self.system).unwrap();
        writeln!(
            out,
            "ambient dimension: {}; algebra dimension: {}",
            self.ambient, self.dimension
        )
        .unwrap();
        writeln!(out, "E faithful: margin {:.6e}", self.faithfulness_margin).unwrap();
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("M{} (x{})", b.dim, b.multiplicity))
            .collect();
        writeln!(out, "blocks: {}", blocks.join(" + ")).unwrap();
        if let Some(o) = &self.orbits {
            for (i, orb) in o.orbits.iter().enumerate() {
                writeln!(
                    out,
                    "  orbit {i}: points {:?}, stabilizer order {}, dim {} (Morita {}), blocks {:?}",
                    orb.points, orb.stabilizer_order, orb.model_dimension, orb.morita_dimension, orb.block_dims
                )
                .unwrap();
            }
            writeln!(
                out,
                "orbit decomposition: dimensions add up {}; blocks concatenate {}; Morita check {}{}",
                yes_no(o.dimensions_add_up),
                yes_no(o.blocks_concatenate),
                yes_no(o.morita_consistent),
                if o.morita_informational { " (informational, nontrivial cocycle)" } else { "" }
            )
            .unwrap();
        }
    }
}

impl Report {
    pub fn text(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Validate(r) => r.text(&mut out),
            Report::Norm(r) => r.text(&mut out),
            Report::Average(r) => r.text(&mut out),
            Report::Ideals(r) => r.text(&mut out),
            Report::Traces(r) => r.text(&mut out),
            Report::Decompose(r) => r.text(&mut out),
            Report::Full(r) => {
                r.validate.text(&mut out);
                for n in &r.norms {
                    n.text(&mut out);
                }
                if let Some(d) = &r.decompose {
                    out.push('\n');
                    d.text(&mut out);
                }
                if let Some(i) = &r.ideals {
                    out.push('\n');
                    i.text(&mut out);
                }
                if let Some(t) = &r.traces {
                    out.push('\n');
                    t.text(&mut out);
                }
            }
        }
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let res = match self {
            Report::Average(r) => r.rows.iter().try_for_each(|row| w.serialize(row)),
            Report::Norm(r) => w.serialize(NormRow::from(r)),
            _ => {
                return Err(Error::Usage(
                    "csv output is available for norm and averaging commands".into(),
                ))
            }
        };
        res.map_err(|e| Error::Usage(e.to_string()))?;
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Usage(e.to_string()))?).unwrap())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Text => Ok(self.text()),
            Format::Json => Ok(self.json()),
            Format::Csv => self.csv(),
        }
    }
}

#[derive(Serialize)]
struct NormRow<'a> {
    element: &'a str,
    window_size: usize,
    norm_lower: f64,
    l1_upper: f64,
    iterations: usize,
    converged: bool,
}

impl<'a> From<&'a NormReport> for NormRow<'a> {
    fn from(r: &'a NormReport) -> Self {
        Self {
            element: &r.element,
            window_size: r.window_size,
            norm_lower: r.estimate.value,
            l1_upper: r.l1_upper,
            iterations: r.estimate.iterations,
            converged: r.estimate.converged,
        }
    }
}
