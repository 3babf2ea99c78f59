use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::knn::Knn;
use super::manifest::{DatasetManifest, LabeledExample};
use super::svm::LinearSvm;
use super::{DatasetError, Result};
use crate::acoustics::SurfaceState;
use crate::dsp::features;
use crate::nn::{argmax, predict_sample, Network, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    OpenClosed,
    Depth,
    Material,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::OpenClosed, Task::Depth, Task::Material];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::OpenClosed => "open_closed",
            Task::Depth => "depth",
            Task::Material => "material",
        }
    }

    pub fn class_names(self, manifest: &DatasetManifest) -> Vec<String> {
        let h = &manifest.header;
        match self {
            Task::OpenClosed => h.states.iter().map(|s| state_name(*s).to_string()).collect(),
            Task::Depth => h.depths.iter().map(|d| format!("{d:.2}")).collect(),
            Task::Material => h.materials.clone(),
        }
    }

    pub fn label(self, manifest: &DatasetManifest, e: &LabeledExample) -> usize {
        match self {
            Task::OpenClosed => manifest
                .header
                .states
                .iter()
                .position(|s| *s == e.state)
                .expect("state validated against header"),
            Task::Depth => e.depth_class,
            Task::Material => e.material_class,
        }
    }
}

pub fn state_name(s: SurfaceState) -> &'static str {
    match s {
        SurfaceState::Open => "open",
        SurfaceState::Closed => "closed",
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "open_closed" | "openclosed" | "state" => Ok(Task::OpenClosed),
            "depth" => Ok(Task::Depth),
            "material" => Ok(Task::Material),
            other => Err(DatasetError::InvalidConfig(format!("unknown task `{other}`"))),
        }
    }
}

/// Read the examples at `indices` as network samples labelled for `task`.
pub fn load_samples(
    manifest: &DatasetManifest,
    indices: &[usize],
    task: Task,
    with_image: bool,
) -> Result<Vec<Sample>> {
    indices
        .iter()
        .map(|&i| {
            let e = &manifest.examples[i];
            let (_, _, audio) = features::read_grid(manifest.resolve(&e.features))?;
            let image = if with_image {
                let rel = e
                    .image
                    .as_ref()
                    .ok_or_else(|| DatasetError::InvalidConfig(format!("example {} has no image", e.id)))?;
                Some(features::read_grid(manifest.resolve(rel))?.2)
            } else {
                None
            };
            Ok(Sample {
                audio: Some(audio),
                image,
                label: task.label(manifest, e),
            })
        })
        .collect()
}

/// Anything that maps a sample to a class index.
pub trait Predictor: Sync {
    fn predict(&self, s: &Sample) -> Result<usize>;
}

impl Predictor for Network<f32> {
    fn predict(&self, s: &Sample) -> Result<usize> {
        Ok(argmax(&predict_sample(self, s)?))
    }
}

fn flat(s: &Sample) -> Result<&[f32]> {
    s.audio
        .as_deref()
        .ok_or_else(|| DatasetError::InvalidConfig("baselines need audio features".into()))
}

impl Predictor for Knn {
    fn predict(&self, s: &Sample) -> Result<usize> {
        Ok(self.classify(flat(s)?))
    }
}

impl Predictor for LinearSvm {
    fn predict(&self, s: &Sample) -> Result<usize> {
        Ok(self.classify(flat(s)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub task: Option<Task>,
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub total: usize,
    pub accuracy: f64,
    /// `None` for classes absent from the test set.
    pub per_class: Vec<Option<f64>>,
}

impl Metrics {
    pub fn from_predictions(classes: Vec<String>, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.is_empty() {
            return Err(DatasetError::EmptyTestSet);
        }
        let n = classes.len();
        let mut confusion = vec![vec![0usize; n]; n];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= n || p >= n {
                return Err(DatasetError::InvalidConfig(format!("class index out of range ({t}, {p})")));
            }
            confusion[t][p] += 1;
        }
        let correct: usize = (0..n).map(|c| confusion[c][c]).sum();
        let per_class = confusion
            .iter()
            .enumerate()
            .map(|(c, row)| {
                let count: usize = row.iter().sum();
                (count > 0).then(|| row[c] as f64 / count as f64)
            })
            .collect();
        Ok(Metrics {
            task: None,
            classes,
            confusion,
            total: truth.len(),
            accuracy: correct as f64 / truth.len() as f64,
            per_class,
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.confusion.iter().map(|r| r.iter().sum()).collect()
    }

    /// Aligned plain-text table: per-class accuracy, then the confusion
    /// matrix with true classes as rows.
    pub fn to_text(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{title}");
        let _ = writeln!(s, "accuracy {:.4} ({} examples)", self.accuracy, self.total);
        let w = self.classes.iter().map(String::len).max().unwrap_or(5).max(7);
        let _ = writeln!(s, "{:<w$}  {:>8}  {:>6}", "class", "accuracy", "count");
        for (c, name) in self.classes.iter().enumerate() {
            let acc = self.per_class[c].map_or("-".to_string(), |a| format!("{a:.4}"));
            let count: usize = self.confusion[c].iter().sum();
            let _ = writeln!(s, "{name:<w$}  {acc:>8}  {count:>6}");
        }
        let _ = write!(s, "{:<w$}", "true\\pred");
        for name in &self.classes {
            let _ = write!(s, "  {name:>w$}");
        }
        s.push('\n');
        for (c, row) in self.confusion.iter().enumerate() {
            let _ = write!(s, "{:<w$}", self.classes[c]);
            for v in row {
                let _ = write!(s, "  {v:>w$}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("true\\pred");
        for name in &self.classes {
            let _ = write!(s, ",{name}");
        }
        s.push('\n');
        for (c, row) in self.confusion.iter().enumerate() {
            s.push_str(&self.classes[c]);
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

/// Predict every sample and tabulate against its label.
pub fn evaluate<P: Predictor + ?Sized>(
    predictor: &P,
    samples: &[Sample],
    task: Task,
    classes: Vec<String>,
) -> Result<(Metrics, Vec<usize>)> {
    use rayon::prelude::*;
    if samples.is_empty() {
        return Err(DatasetError::EmptyTestSet);
    }
    let predicted = samples
        .par_iter()
        .map(|s| predictor.predict(s))
        .collect::<Result<Vec<usize>>>()?;
    let truth: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let mut m = Metrics::from_predictions(classes, &truth, &predicted)?;
    m.task = Some(task);
    Ok((m, predicted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn perfect_and_constant_predictors() {
        let truth = [0, 1, 2, 2, 1, 2];
        let m = Metrics::from_predictions(names(3), &truth, &truth).unwrap();
        assert_eq!(m.accuracy, 1.0);
        for (i, row) in m.confusion.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v > 0, i == j);
            }
        }
        let m = Metrics::from_predictions(names(3), &truth, &[2; 6]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.class_counts(), vec![1, 2, 3]);
        let trace: usize = (0..3).map(|c| m.confusion[c][c]).sum();
        assert_eq!(trace as f64 / m.total as f64, m.accuracy);
    }

    #[test]
    fn reports_render() {
        let m = Metrics::from_predictions(names(2), &[0, 1, 1], &[0, 0, 1]).unwrap();
        let text = m.to_text("depth");
        assert!(text.contains("accuracy 0.6667"));
        assert_eq!(m.to_csv(), "true\\pred,c0,c1\nc0,1,0\nc1,1,1\n");
        assert!(Metrics::from_predictions(names(2), &[], &[]).is_err());
    }

    #[test]
    fn task_names() {
        for t in Task::ALL {
            assert_eq!(t.as_str().parse::<Task>().unwrap(), t);
        }
        assert!("colour".parse::<Task>().is_err());
    }
}
