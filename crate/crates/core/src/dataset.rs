//! Image-grid samples, the synthetic long-tailed generator, stratified
//! labeled/unlabeled splitting, and the CSV interchange format.
//!
//! CSV layout:
//!
//! ```text
//! # splal-dataset height=16 width=16 classes=4
//! id,label,p0,p1,...,p255
//! 0,2,0.1,0.25,...
//! ```
//!
//! `label` is `-1` for unlabeled rows. Pixels are written in shortest
//! round-trip form so a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::one_hot;

const CSV_MAGIC: &str = "# splal-dataset";

/// Single-channel `height x width` image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::domain(format!(
                "{height}x{width} grid cannot hold {} values",
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }
}

/// What the learner is allowed to see about a sample's class.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    None,
    GroundTruth(usize),
    /// Soft pseudo-label and the stage that assigned it.
    Pseudo {
        probs: Vec<f64>,
        stage: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Unlabeled,
    GroundTruth,
    Pseudo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: usize,
    pub grid: Grid,
    /// Hidden true class, when known (always for synthetic data).
    pub truth: Option<usize>,
    pub label: Label,
}

impl Sample {
    pub fn provenance(&self) -> Provenance {
        match self.label {
            Label::None => Provenance::Unlabeled,
            Label::GroundTruth(_) => Provenance::GroundTruth,
            Label::Pseudo { .. } => Provenance::Pseudo,
        }
    }

    /// Training target as a distribution, if the sample carries a label.
    pub fn target(&self, num_classes: usize) -> Option<Vec<f64>> {
        match &self.label {
            Label::None => None,
            Label::GroundTruth(k) => Some(one_hot(*k, num_classes)),
            Label::Pseudo { probs, .. } => Some(probs.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub height: usize,
    pub width: usize,
    pub num_classes: usize,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-class counts of the hidden truth.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for s in &self.samples {
            if let Some(k) = s.truth {
                counts[k] += 1;
            }
        }
        counts
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> String {
        let pixels = self.height * self.width;
        let mut out = String::with_capacity(self.samples.len() * pixels * 20);
        let _ = writeln!(
            out,
            "{CSV_MAGIC} height={} width={} classes={}",
            self.height, self.width, self.num_classes
        );
        out.push_str("id,label");
        for p in 0..pixels {
            let _ = write!(out, ",p{p}");
        }
        out.push('\n');
        for s in &self.samples {
            let label = s.truth.map(|k| k as i64).unwrap_or(-1);
            let _ = write!(out, "{},{}", s.id, label);
            for v in s.grid.data() {
                // `{:?}` is the shortest representation that round-trips
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (n, meta) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let meta = meta
            .strip_prefix(CSV_MAGIC)
            .ok_or_else(|| err(n, format!("expected header starting with '{CSV_MAGIC}'")))?;
        let (mut height, mut width, mut classes) = (None, None, None);
        for field in meta.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| err(n, format!("malformed header field '{field}'")))?;
            let value: usize = value
                .parse()
                .map_err(|_| err(n, format!("header field '{key}' is not a count")))?;
            match key {
                "height" => height = Some(value),
                "width" => width = Some(value),
                "classes" => classes = Some(value),
                _ => return Err(err(n, format!("unknown header field '{key}'"))),
            }
        }
        let (height, width, num_classes) = match (height, width, classes) {
            (Some(h), Some(w), Some(k)) if h > 0 && w > 0 && k > 0 => (h, w, k),
            _ => return Err(err(n, "header must declare positive height, width and classes".into())),
        };
        let pixels = height * width;

        let (n, columns) = lines.next().ok_or_else(|| err(2, "missing column header".into()))?;
        let expected: Vec<String> = ["id".to_string(), "label".to_string()]
            .into_iter()
            .chain((0..pixels).map(|p| format!("p{p}")))
            .collect();
        if columns.split(',').ne(expected.iter().map(String::as_str)) {
            return Err(err(n, format!("column header must be id,label,p0..p{}", pixels - 1)));
        }

        let mut samples = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != pixels + 2 {
                return Err(err(
                    n,
                    format!("expected {} fields, found {}", pixels + 2, fields.len()),
                ));
            }
            let id: usize = fields[0]
                .parse()
                .map_err(|_| err(n, format!("bad id '{}'", fields[0])))?;
            let label: i64 = fields[1]
                .parse()
                .map_err(|_| err(n, format!("bad label '{}'", fields[1])))?;
            let truth = match label {
                -1 => None,
                k if k >= 0 && (k as usize) < num_classes => Some(k as usize),
                k => return Err(err(n, format!("label {k} outside 0..{num_classes} (or -1)"))),
            };
            let mut data = Vec::with_capacity(pixels);
            for (i, f) in fields[2..].iter().enumerate() {
                let v: f64 = f.parse().map_err(|_| err(n, format!("bad pixel p{i} '{f}'")))?;
                if !v.is_finite() {
                    return Err(err(n, format!("non-finite pixel p{i}")));
                }
                data.push(v);
            }
            samples.push(Sample {
                id,
                grid: Grid::new(height, width, data)?,
                truth,
                label: truth.map(Label::GroundTruth).unwrap_or(Label::None),
            });
        }
        let mut ids: Vec<usize> = samples.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(err(0, "duplicate sample ids".into()));
        }
        Ok(Self {
            height,
            width,
            num_classes,
            samples,
        })
    }
}

/// Parameters of the synthetic long-tailed benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub counts: Vec<usize>,
    pub height: usize,
    pub width: usize,
    /// Standard deviation of additive Gaussian pixel noise.
    pub noise: f64,
    /// Largest displacement of a pattern from the grid center, in pixels.
    pub max_shift: f64,
    /// Pattern intensity is drawn uniformly from `[min_amplitude, 1]`.
    pub min_amplitude: f64,
    /// Pattern size is scaled by a factor in `1 ± scale_jitter`.
    pub scale_jitter: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            counts: vec![500, 200, 60, 20],
            height: 16,
            width: 16,
            noise: 0.15,
            max_shift: 2.0,
            min_amplitude: 0.6,
            scale_jitter: 0.2,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.height < 8 || self.width < 8 {
            return Err(Error::domain(format!(
                "synthetic grids must be at least 8x8, got {}x{}",
                self.height, self.width
            )));
        }
        if self.counts.is_empty() || self.counts.contains(&0) {
            return Err(Error::domain("every synthetic class needs at least one sample"));
        }
        if !(self.noise >= 0.0)
            || !(self.max_shift >= 0.0)
            || !(0.0..=1.0).contains(&self.min_amplitude)
            || !(0.0..1.0).contains(&self.scale_jitter)
        {
            return Err(Error::domain(
                "noise and shift must be nonnegative, min_amplitude in [0, 1], scale_jitter in [0, 1)",
            ));
        }
        Ok(())
    }

    /// Majority count over minority count.
    pub fn imbalance_ratio(&self) -> f64 {
        let max = *self.counts.iter().max().unwrap_or(&1);
        let min = *self.counts.iter().min().unwrap_or(&1);
        max as f64 / min as f64
    }

    /// Balanced held-out spec drawn from the same pattern families with a
    /// disjoint seed.
    pub fn test_spec(&self, per_class: usize) -> Self {
        Self {
            counts: vec![per_class; self.num_classes()],
            seed: self.seed ^ 0x7E57_5EED_0000_0001,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Family {
    Bar,
    Blob,
    Ring,
    Checker,
}

/// Pattern intensity at pixel `(r, c)` for class `k`, relative to a center
/// offset `(dr, dc)` and scale factor `s`.
fn pattern(k: usize, r: f64, c: f64, center: (f64, f64), s: f64) -> f64 {
    let family = [Family::Bar, Family::Blob, Family::Ring, Family::Checker][k % 4];
    let variant = (k / 4) as f64;
    let (y, x) = (r - center.0, c - center.1);
    match family {
        // horizontal for even variants, vertical for odd ones
        Family::Bar => {
            let d = if (k / 4) % 2 == 0 { y } else { x };
            (-(d * d) / (2.0 * (1.0 + 0.5 * variant) * s)).exp()
        }
        Family::Blob => {
            let sigma = (2.0 + variant) * s;
            (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
        }
        Family::Ring => {
            let radius = (4.0 + 1.5 * variant) * s;
            let d = (x * x + y * y).sqrt() - radius;
            (-(d * d) / 1.5).exp()
        }
        // cells mirror around the center, so flips leave the pattern intact
        Family::Checker => {
            let w = std::f64::consts::PI / (4.0 + 2.0 * variant);
            0.5 * (1.0 + (w * x).cos() * (w * y).cos())
        }
    }
}

fn sample_grid(spec: &SyntheticSpec, class: usize, rng: &mut ChaCha8Rng) -> Grid {
    let (h, w) = (spec.height, spec.width);
    let center = (
        (h as f64 - 1.0) / 2.0 + rng.random_range(-1.0..=1.0) * spec.max_shift,
        (w as f64 - 1.0) / 2.0 + rng.random_range(-1.0..=1.0) * spec.max_shift,
    );
    let scale = 1.0 + rng.random_range(-1.0..=1.0) * spec.scale_jitter;
    let amplitude = rng.random_range(spec.min_amplitude..=1.0);
    let noise = Normal::new(0.0, spec.noise.max(0.0)).expect("finite noise");
    let mut data = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let clean = amplitude * pattern(class, r as f64, c as f64, center, scale);
            let v = if spec.noise > 0.0 {
                clean + noise.sample(rng)
            } else {
                clean
            };
            data.push(v.clamp(0.0, 1.0));
        }
    }
    Grid::new(h, w, data).expect("synthetic shape")
}

/// Renders `spec.counts[k]` samples of each class `k`. Ids are assigned in
/// class order; each sample draws from its own stream of the spec seed.
pub fn generate(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut samples = Vec::with_capacity(spec.counts.iter().sum());
    for (class, &count) in spec.counts.iter().enumerate() {
        for _ in 0..count {
            let id = samples.len();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(id as u64);
            samples.push(Sample {
                id,
                grid: sample_grid(spec, class, &mut rng),
                truth: Some(class),
                label: Label::GroundTruth(class),
            });
        }
    }
    Ok(Dataset {
        height: spec.height,
        width: spec.width,
        num_classes: spec.num_classes(),
        samples,
    })
}

/// Number of labeled samples kept for a class of size `n`.
pub fn labeled_count(ratio: f64, n: usize) -> usize {
    // guard against 0.1 * 30 = 3.0000000000000004
    (((ratio * n as f64) - 1e-9).ceil() as usize).clamp(1, n)
}

/// Stratified split: per class, `ceil(ratio * n_k)` (at least one) samples
/// keep their label; the rest lose their visible label but keep the hidden
/// truth. Samples without a known class always go to the unlabeled pool.
pub fn split_labeled<R: Rng + ?Sized>(
    dataset: &Dataset,
    ratio: f64,
    rng: &mut R,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::config(format!("labeled ratio must lie in (0, 1], got {ratio}")));
    }
    let mut by_class: Vec<Vec<&Sample>> = vec![Vec::new(); dataset.num_classes];
    let mut unknown = Vec::new();
    for s in &dataset.samples {
        match s.truth {
            Some(k) => by_class[k].push(s),
            None => unknown.push(s),
        }
    }
    if let Some(k) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::domain(format!("class {k} has no labeled samples to split")));
    }
    let mut labeled = Vec::new();
    let mut unlabeled = Vec::new();
    for (k, members) in by_class.iter_mut().enumerate() {
        members.shuffle(rng);
        let keep = labeled_count(ratio, members.len());
        for (i, s) in members.iter().enumerate() {
            let mut s = (*s).clone();
            if i < keep {
                s.label = Label::GroundTruth(k);
                labeled.push(s);
            } else {
                s.label = Label::None;
                unlabeled.push(s);
            }
        }
    }
    unlabeled.extend(unknown.into_iter().cloned().map(|mut s| {
        s.label = Label::None;
        s
    }));
    labeled.sort_by_key(|s| s.id);
    unlabeled.sort_by_key(|s| s.id);
    Ok((labeled, unlabeled))
}

/// Sidecar describing a generated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: SyntheticSpec,
    pub samples: usize,
    pub class_counts: Vec<usize>,
    pub imbalance_ratio: f64,
    pub csv_sha256: String,
}

impl Manifest {
    pub fn new(spec: &SyntheticSpec, dataset: &Dataset, csv: &str) -> Self {
        Self {
            spec: spec.clone(),
            samples: dataset.len(),
            class_counts: dataset.class_counts(),
            imbalance_ratio: spec.imbalance_ratio(),
            csv_sha256: sha256_hex(csv.as_bytes()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_spec() -> SyntheticSpec {
        SyntheticSpec {
            counts: vec![12, 6, 3],
            height: 8,
            width: 8,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn default_spec_shape() {
        let spec = SyntheticSpec::default();
        assert_eq!(spec.imbalance_ratio(), 25.0);
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.len(), 780);
        assert_eq!(ds.class_counts(), vec![500, 200, 60, 20]);
        assert!(ds
            .samples
            .iter()
            .all(|s| s.grid.data().iter().all(|v| (0.0..=1.0).contains(v))));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = small_spec();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SyntheticSpec {
            seed: 8,
            ..spec.clone()
        };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn rejects_small_or_empty_specs() {
        let tiny = SyntheticSpec {
            height: 7,
            ..small_spec()
        };
        assert!(matches!(generate(&tiny), Err(Error::Domain(_))));
        let empty = SyntheticSpec {
            counts: vec![3, 0],
            ..small_spec()
        };
        assert!(generate(&empty).is_err());
    }

    #[test]
    fn noiseless_without_jitter_is_constant_per_class() {
        let spec = SyntheticSpec {
            counts: vec![6, 6, 6, 6],
            noise: 0.0,
            max_shift: 0.0,
            min_amplitude: 1.0,
            scale_jitter: 0.0,
            ..small_spec()
        };
        let ds = generate(&spec).unwrap();
        for k in 0..4 {
            let members: Vec<&Sample> = ds.samples.iter().filter(|s| s.truth == Some(k)).collect();
            assert!(members.iter().all(|s| s.grid == members[0].grid), "class {k}");
        }
    }

    #[test]
    fn noiseless_centered_patterns_are_mirror_symmetric() {
        let spec = SyntheticSpec {
            counts: vec![1; 8],
            noise: 0.0,
            max_shift: 0.0,
            scale_jitter: 0.0,
            ..SyntheticSpec::default()
        };
        let ds = generate(&spec).unwrap();
        for s in &ds.samples {
            let g = &s.grid;
            for r in 0..g.height() {
                for c in 0..g.width() {
                    let v = g.get(r, c);
                    assert_eq!(v, g.get(r, g.width() - 1 - c), "class {:?}", s.truth);
                    assert_eq!(v, g.get(g.height() - 1 - r, c), "class {:?}", s.truth);
                }
            }
        }
    }

    /// Nearest-class-mean over noiseless, mildly shifted samples separates
    /// every class.
    #[test]
    fn noiseless_class_means_are_distinguishable() {
        let spec = SyntheticSpec {
            noise: 0.0,
            max_shift: 1.0,
            ..SyntheticSpec::default()
        };
        let ds = generate(&spec).unwrap();
        let pixels = spec.height * spec.width;
        let mut means = vec![vec![0.0; pixels]; spec.num_classes()];
        for s in &ds.samples {
            let k = s.truth.unwrap();
            for (m, v) in means[k].iter_mut().zip(s.grid.data()) {
                *m += v / spec.counts[k] as f64;
            }
        }
        let mut correct = 0;
        for s in &ds.samples {
            let dist = |m: &Vec<f64>| -> f64 { m.iter().zip(s.grid.data()).map(|(a, b)| (a - b) * (a - b)).sum() };
            let best = (0..means.len())
                .min_by(|&a, &b| dist(&means[a]).total_cmp(&dist(&means[b])))
                .unwrap();
            correct += usize::from(best == s.truth.unwrap());
        }
        assert_eq!(correct, ds.len());
    }

    #[test]
    fn split_counts_follow_ceiling() {
        let ds = generate(&SyntheticSpec::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (l, u) = split_labeled(&ds, 0.2, &mut rng).unwrap();
        let mut counts = vec![0; 4];
        for s in &l {
            counts[s.truth.unwrap()] += 1;
            assert_eq!(s.provenance(), Provenance::GroundTruth);
        }
        assert_eq!(counts, vec![100, 40, 12, 4]);
        assert_eq!(l.len() + u.len(), 780);
        assert!(u.iter().all(|s| s.label == Label::None && s.truth.is_some()));

        let (l, u) = split_labeled(&ds, 1.0, &mut rng).unwrap();
        assert_eq!(l.len(), 780);
        assert!(u.is_empty());

        let (l, _) = split_labeled(&ds, 0.001, &mut rng).unwrap();
        assert_eq!(l.len(), 4);
        assert!(split_labeled(&ds, 0.0, &mut rng).is_err());
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let ds = generate(&small_spec()).unwrap();
        let a = split_labeled(&ds, 0.3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = split_labeled(&ds, 0.3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut ds = generate(&small_spec()).unwrap();
        ds.samples[3].truth = None;
        ds.samples[3].label = Label::None;
        let text = ds.to_csv_string();
        assert!(text.lines().nth(5).unwrap().starts_with("3,-1,"));
        let back = Dataset::parse_csv(&text, Path::new("mem.csv")).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_short_row_names_line() {
        let ds = generate(&small_spec()).unwrap();
        let text = ds.to_csv_string();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let row = &mut lines[4];
        let cut = row.rfind(',').unwrap();
        row.truncate(cut);
        let broken = lines.join("\n");
        match Dataset::parse_csv(&broken, Path::new("d.csv")) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("fields"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(Dataset::parse_csv("id,label\n", Path::new("x")).is_err());
        assert!(Dataset::parse_csv("# splal-dataset height=2 width=2\n", Path::new("x")).is_err());
        let bad_cols = "# splal-dataset height=1 width=1 classes=2\nid,label,q0\n";
        assert!(matches!(
            Dataset::parse_csv(bad_cols, Path::new("x")),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad_label = "# splal-dataset height=1 width=1 classes=2\nid,label,p0\n0,5,0.1\n";
        assert!(matches!(
            Dataset::parse_csv(bad_label, Path::new("x")),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    proptest! {
        #[test]
        fn split_is_exactly_stratified(
            counts in prop::collection::vec(1usize..40, 1..5),
            ratio in 0.01f64..=1.0,
            seed in any::<u64>(),
        ) {
            let spec = SyntheticSpec { counts: counts.clone(), height: 8, width: 8, ..SyntheticSpec::default() };
            let ds = generate(&spec).unwrap();
            let (l, u) = split_labeled(&ds, ratio, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for (k, &n) in counts.iter().enumerate() {
                let got = l.iter().filter(|s| s.truth == Some(k)).count();
                prop_assert_eq!(got, labeled_count(ratio, n));
                prop_assert!(got >= 1);
            }
            prop_assert_eq!(l.len() + u.len(), ds.len());
        }
    }
}
