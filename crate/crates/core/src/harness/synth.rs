//! Synthetic multi-view data with a controllable projection domain shift.
//!
//! Class structure lives in a low-dimensional latent subspace of the feature
//! space: an instance is `x = z L + noise`, with `z` scattered around its
//! class centre. Semantics are functions of the noise-free part: attributes
//! `sigmoid(z G_A)` and word vectors `z G_V`. Target
//! classes see a perturbed map: the semantic output is rotated by an angle
//! proportional to the shift inside a random 2-plane and translated along a
//! random direction, so a projection learned on auxiliary classes is biased
//! on the target classes.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, RowDVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::annotation::Vocabulary;
use crate::data::{
    save_labels, save_matrix, save_named_rows, AuxiliarySection, Dataset, Manifest, MatrixEntry, PrototypeSet,
    TargetSection, ViewEntry, ViewId, ViewMatrix,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_aux_classes: usize,
    pub n_target_classes: usize,
    pub instances_per_class: usize,
    pub feature_dim: usize,
    pub attribute_dim: usize,
    pub wordvec_dim: usize,
    pub shift_magnitude: f64,
    /// Isotropic feature noise.
    pub noise_sigma: f64,
    /// Slope of the attribute sigmoid.
    pub attribute_gain: f64,
    /// Length of the target-map translation per unit of shift, relative to
    /// the spread of the semantic pre-activations.
    pub shift_translation: f64,
    /// Dimension of the class subspace inside the feature space.
    pub latent_dim: usize,
    /// Within-class spread in the latent subspace.
    pub latent_sigma: f64,
    /// Extra vocabulary entries that belong to no class.
    pub n_distractors: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_aux_classes: 11,
            n_target_classes: 10,
            instances_per_class: 40,
            feature_dim: 60,
            attribute_dim: 10,
            wordvec_dim: 10,
            shift_magnitude: 0.3,
            noise_sigma: 0.6,
            attribute_gain: 0.5,
            shift_translation: 0.5,
            latent_dim: 10,
            latent_sigma: 0.35,
            n_distractors: 40,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_dim < 2 || self.attribute_dim < 2 || self.wordvec_dim < 2 {
            return Err(Error::InvalidArgument("synthetic dims must be >= 2".into()));
        }
        if self.n_aux_classes == 0 || self.n_target_classes < 2 || self.instances_per_class == 0 {
            return Err(Error::InvalidArgument(
                "need >= 1 auxiliary class, >= 2 target classes and >= 1 instance per class".into(),
            ));
        }
        if !(self.shift_magnitude >= 0.0 && self.shift_magnitude.is_finite()) {
            return Err(Error::InvalidArgument("shift_magnitude must be finite and >= 0".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite())
            || !(self.latent_sigma >= 0.0 && self.latent_sigma.is_finite())
        {
            return Err(Error::InvalidArgument("noise levels must be finite and >= 0".into()));
        }
        if self.latent_dim == 0 || self.latent_dim > self.feature_dim {
            return Err(Error::InvalidArgument("latent_dim must lie in 1..=feature_dim".into()));
        }
        Ok(())
    }
}

/// Rotation by `theta` in a 2-plane plus a translation, acting on row
/// vectors of one semantic space.
#[derive(Clone, Debug)]
pub struct SemanticShift {
    pub rotation: DMatrix<f64>,
    pub translation: RowDVector<f64>,
}

impl SemanticShift {
    pub fn identity(dim: usize) -> Self {
        Self {
            rotation: DMatrix::identity(dim, dim),
            translation: RowDVector::zeros(dim),
        }
    }

    fn random(rng: &mut ChaCha8Rng, dim: usize, magnitude: f64, scale: f64) -> Self {
        // Draws happen regardless of magnitude so the rest of the stream does
        // not depend on it.
        let basis = orthonormal_pair(rng, dim);
        let dir = unit(rng, dim);
        let theta = magnitude * std::f64::consts::FRAC_PI_2;
        let (u, v) = basis;
        let mut rotation = DMatrix::identity(dim, dim);
        // R = I + (cos - 1)(uu' + vv') + sin (vu' - uv'), applied as row * R'.
        let uu = &u * u.transpose();
        let vv = &v * v.transpose();
        let vu = &v * u.transpose();
        rotation += (uu + vv) * (theta.cos() - 1.0) + (&vu - vu.transpose()) * theta.sin();
        Self {
            rotation: rotation.transpose(),
            translation: dir.transpose() * (magnitude * scale),
        }
    }

    pub fn apply(&self, rows: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = rows * &self.rotation;
        for mut r in out.row_iter_mut() {
            r += &self.translation;
        }
        out
    }
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> nalgebra::DVector<f64> {
    let v = nalgebra::DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    v.normalize()
}

fn orthonormal_pair(rng: &mut ChaCha8Rng, dim: usize) -> (nalgebra::DVector<f64>, nalgebra::DVector<f64>) {
    let u = unit(rng, dim);
    let mut v = unit(rng, dim);
    v -= &u * u.dot(&v);
    (u, v.normalize())
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Ground truth behind a synthetic dataset.
#[derive(Clone, Debug)]
pub struct SynthTruth {
    /// `latent_dim x feature_dim`.
    pub loading: DMatrix<f64>,
    pub attribute_map: DMatrix<f64>,
    pub wordvec_map: DMatrix<f64>,
    pub attribute_shift: SemanticShift,
    pub wordvec_shift: SemanticShift,
    /// Target instance attributes under the shifted map.
    pub target_attributes: DMatrix<f64>,
    pub target_wordvecs: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub config: SynthConfig,
    pub dataset: Dataset,
    pub prototypes: PrototypeSet,
    pub vocabulary: Vocabulary,
    pub truth: SynthTruth,
}

fn class_names(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(2);
    (0..n).map(|c| format!("{prefix}_{c:0width$}")).collect()
}

fn class_means(rows: &DMatrix<f64>, labels: &[usize], n_classes: usize) -> DMatrix<f64> {
    let mut sums = DMatrix::zeros(n_classes, rows.ncols());
    let mut counts = vec![0.0; n_classes];
    for (k, &c) in labels.iter().enumerate() {
        let mut r = sums.row_mut(c);
        r += rows.row(k);
        counts[c] += 1.0;
    }
    for (c, n) in counts.into_iter().enumerate() {
        sums.row_mut(c).unscale_mut(n);
    }
    sums
}

fn instances(rng: &mut ChaCha8Rng, centres: &DMatrix<f64>, per_class: usize, sigma: f64) -> (DMatrix<f64>, Vec<usize>) {
    let (c, t) = centres.shape();
    let mut x = DMatrix::zeros(c * per_class, t);
    let mut labels = Vec::with_capacity(c * per_class);
    for class in 0..c {
        for i in 0..per_class {
            let k = class * per_class + i;
            for d in 0..t {
                x[(k, d)] = centres[(class, d)] + sigma * rng.sample::<f64, _>(StandardNormal);
            }
            labels.push(class);
        }
    }
    (x, labels)
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let t = cfg.feature_dim;
    let k = cfg.latent_dim;
    let scale = 1.0 / (k as f64).sqrt();
    let loading = gaussian(&mut rng, k, t) * scale;
    let attribute_map = gaussian(&mut rng, k, cfg.attribute_dim) * (cfg.attribute_gain * scale);
    let wordvec_map = gaussian(&mut rng, k, cfg.wordvec_dim) * scale;
    let attribute_shift =
        SemanticShift::random(&mut rng, cfg.attribute_dim, cfg.shift_magnitude, cfg.attribute_gain * cfg.shift_translation);
    let wordvec_shift = SemanticShift::random(&mut rng, cfg.wordvec_dim, cfg.shift_magnitude, cfg.shift_translation);

    let aux_centres = gaussian(&mut rng, cfg.n_aux_classes, k);
    let target_centres = gaussian(&mut rng, cfg.n_target_classes, k);
    let (z_aux, aux_labels) = instances(&mut rng, &aux_centres, cfg.instances_per_class, cfg.latent_sigma);
    let (mut z_tgt, mut tgt_labels) = instances(&mut rng, &target_centres, cfg.instances_per_class, cfg.latent_sigma);

    // Shuffle target instances so that class blocks are not contiguous.
    let mut order: Vec<usize> = (0..z_tgt.nrows()).collect();
    order.shuffle(&mut rng);
    z_tgt = DMatrix::from_fn(z_tgt.nrows(), k, |r, c| z_tgt[(order[r], c)]);
    tgt_labels = order.iter().map(|&i| tgt_labels[i]).collect();

    let x_aux = &z_aux * &loading + gaussian(&mut rng, z_aux.nrows(), t) * cfg.noise_sigma;
    let x_tgt = &z_tgt * &loading + gaussian(&mut rng, z_tgt.nrows(), t) * cfg.noise_sigma;

    let attributes = |z: &DMatrix<f64>, shift: Option<&SemanticShift>| {
        let mut pre = z * &attribute_map;
        if let Some(s) = shift {
            pre = s.apply(&pre);
        }
        pre.map(sigmoid)
    };
    let wordvecs = |z: &DMatrix<f64>, shift: Option<&SemanticShift>| {
        let pre = z * &wordvec_map;
        match shift {
            Some(s) => s.apply(&pre),
            None => pre,
        }
    };

    let a_aux = attributes(&z_aux, None);
    let v_aux = wordvecs(&z_aux, None);
    let a_tgt = attributes(&z_tgt, Some(&attribute_shift));
    let v_tgt = wordvecs(&z_tgt, Some(&wordvec_shift));

    // Auxiliary supervision is class level: every instance carries its
    // class's mean semantics.
    let aux_names = class_names("aux", cfg.n_aux_classes);
    let tgt_names = class_names("tgt", cfg.n_target_classes);
    let a_aux_proto = class_means(&a_aux, &aux_labels, cfg.n_aux_classes);
    let v_aux_proto = class_means(&v_aux, &aux_labels, cfg.n_aux_classes);
    let expand = |protos: &DMatrix<f64>| DMatrix::from_fn(aux_labels.len(), protos.ncols(), |r, c| protos[(aux_labels[r], c)]);

    let aux_label_names: Vec<String> = aux_labels.iter().map(|&c| aux_names[c].clone()).collect();
    let tgt_label_names: Vec<String> = tgt_labels.iter().map(|&c| tgt_names[c].clone()).collect();
    let dataset = Dataset::new(
        ViewMatrix::new(x_aux, ViewId::Features)?,
        vec![
            ViewMatrix::new(expand(&a_aux_proto), ViewId::Attributes)?,
            ViewMatrix::new(expand(&v_aux_proto), ViewId::WordVectors)?,
        ],
        &aux_label_names,
        ViewMatrix::new(x_tgt, ViewId::Features)?,
        Some(&tgt_label_names),
        &tgt_names,
    )?;

    let a_tgt_proto = class_means(&a_tgt, &tgt_labels, cfg.n_target_classes);
    let v_tgt_proto = class_means(&v_tgt, &tgt_labels, cfg.n_target_classes);
    let mut views = BTreeMap::new();
    views.insert(ViewId::Attributes, a_tgt_proto);
    views.insert(ViewId::WordVectors, v_tgt_proto.clone());
    let prototypes = PrototypeSet::new(tgt_names.clone(), views)?;

    let mut words = tgt_names.clone();
    words.extend(aux_names.iter().cloned());
    let distractor_latent = gaussian(&mut rng, cfg.n_distractors, k);
    let distractors = &distractor_latent * &wordvec_map;
    let mut vectors = DMatrix::zeros(words.len() + cfg.n_distractors, cfg.wordvec_dim);
    vectors.rows_mut(0, cfg.n_target_classes).copy_from(&v_tgt_proto);
    vectors.rows_mut(cfg.n_target_classes, cfg.n_aux_classes).copy_from(&v_aux_proto);
    vectors
        .rows_mut(cfg.n_target_classes + cfg.n_aux_classes, cfg.n_distractors)
        .copy_from(&distractors);
    words.extend(class_names("word", cfg.n_distractors));
    let vocabulary = Vocabulary::new(words, vectors)?;

    Ok(SyntheticData {
        config: cfg.clone(),
        dataset,
        prototypes,
        vocabulary,
        truth: SynthTruth {
            loading,
            attribute_map,
            wordvec_map,
            attribute_shift,
            wordvec_shift,
            target_attributes: a_tgt,
            target_wordvecs: v_tgt,
        },
    })
}

impl SyntheticData {
    /// Writes CSV files and a `manifest.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let ds = &self.dataset;
        save_matrix(ds.auxiliary_features().data(), dir.join("aux_X.csv"))?;
        let mut semantics = Vec::new();
        for sem in ds.auxiliary_semantics() {
            let name = format!("aux_{}.csv", sem.view());
            save_matrix(sem.data(), dir.join(&name))?;
            semantics.push(ViewEntry {
                view: sem.view(),
                path: name.into(),
                dim: Some(sem.dim()),
            });
        }
        let aux_labels: Vec<String> = ds
            .auxiliary_labels()
            .iter()
            .map(|&c| ds.auxiliary_classes()[c].clone())
            .collect();
        save_labels(&aux_labels, dir.join("aux_labels.txt"))?;
        save_matrix(ds.target_features().data(), dir.join("target_X.csv"))?;
        let target_labels = ds.target_labels().map(|l| {
            l.iter().map(|&c| ds.target_classes()[c].clone()).collect::<Vec<_>>()
        });
        if let Some(l) = &target_labels {
            save_labels(l, dir.join("target_labels.txt"))?;
        }
        let mut prototypes = Vec::new();
        for view in self.prototypes.views() {
            let name = format!("prototypes_{view}.csv");
            let m = self.prototypes.get(view).expect("view listed");
            save_named_rows(self.prototypes.classes(), m, dir.join(&name))?;
            prototypes.push(ViewEntry {
                view,
                path: name.into(),
                dim: Some(m.ncols()),
            });
        }
        self.vocabulary.save(dir.join("vocabulary.csv"))?;
        let manifest = Manifest {
            auxiliary: AuxiliarySection {
                features: MatrixEntry::Declared {
                    path: "aux_X.csv".into(),
                    dim: Some(ds.auxiliary_features().dim()),
                },
                semantics,
                labels: "aux_labels.txt".into(),
            },
            target: TargetSection {
                features: MatrixEntry::Declared {
                    path: "target_X.csv".into(),
                    dim: Some(ds.target_features().dim()),
                },
                labels: target_labels.map(|_| "target_labels.txt".into()),
            },
            prototypes,
        };
        manifest.write(dir.join("manifest.json"))
    }
}

/// Settings of the shared-latent annotation fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SharedLatentConfig {
    pub seed: u64,
    pub n_classes: usize,
    pub instances_per_class: usize,
    pub latent_dim: usize,
    pub feature_dim: usize,
    pub attribute_dim: usize,
    pub wordvec_dim: usize,
    /// Within-class spread in the latent space.
    pub latent_sigma: f64,
    /// Independent noise added to each observed view.
    pub view_noise: f64,
    pub n_distractors: usize,
    /// Classes of the auxiliary domain, whose attribute map is shifted.
    pub n_aux_classes: usize,
    pub aux_shift: f64,
}

impl Default for SharedLatentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_classes: 8,
            instances_per_class: 40,
            latent_dim: 6,
            feature_dim: 30,
            attribute_dim: 16,
            wordvec_dim: 12,
            latent_sigma: 0.5,
            view_noise: 1.0,
            n_distractors: 100,
            n_aux_classes: 8,
            aux_shift: 0.6,
        }
    }
}

/// Instances whose three views are noisy linear images of one latent code.
#[derive(Clone, Debug)]
pub struct SharedLatentData {
    pub features: DMatrix<f64>,
    pub attributes: DMatrix<f64>,
    pub wordvecs: DMatrix<f64>,
    /// Noise-free attribute signs, 1 or 0.
    pub attribute_truth: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
    /// Noise-free class-level semantics.
    pub attribute_prototypes: DMatrix<f64>,
    pub wordvec_prototypes: DMatrix<f64>,
    pub vocabulary: Vocabulary,
    /// Auxiliary-domain instances, generated with a shifted attribute map.
    pub aux_features: DMatrix<f64>,
    pub aux_attributes: DMatrix<f64>,
}

pub fn generate_shared_latent(cfg: &SharedLatentConfig) -> Result<SharedLatentData> {
    if cfg.n_classes < 2 || cfg.n_aux_classes == 0 || cfg.instances_per_class == 0 || cfg.latent_dim == 0 {
        return Err(Error::InvalidArgument("shared-latent fixture needs >= 2 classes and instances".into()));
    }
    if cfg.feature_dim < 2 || cfg.attribute_dim < 2 || cfg.wordvec_dim < 2 {
        return Err(Error::InvalidArgument("synthetic dims must be >= 2".into()));
    }
    if !(cfg.aux_shift.is_finite() && cfg.aux_shift >= 0.0) {
        return Err(Error::InvalidArgument("aux_shift must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.latent_dim;
    let h_x = gaussian(&mut rng, d, cfg.feature_dim);
    let h_a = gaussian(&mut rng, d, cfg.attribute_dim);
    let h_v = gaussian(&mut rng, d, cfg.wordvec_dim);
    let centres = gaussian(&mut rng, cfg.n_classes, d);
    let (z, labels) = instances(&mut rng, &centres, cfg.instances_per_class, cfg.latent_sigma);
    let n = z.nrows();
    let clean_a = &z * &h_a;
    let features = &z * &h_x + gaussian(&mut rng, n, cfg.feature_dim) * cfg.view_noise;
    let attributes = &clean_a + gaussian(&mut rng, n, cfg.attribute_dim) * cfg.view_noise;
    let wordvecs = &z * &h_v + gaussian(&mut rng, n, cfg.wordvec_dim) * cfg.view_noise;
    let attribute_truth = clean_a.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    let classes = class_names("class", cfg.n_classes);
    let attribute_prototypes = &centres * &h_a;
    let wordvec_prototypes = &centres * &h_v;

    let distractors = gaussian(&mut rng, cfg.n_distractors, d) * &h_v;
    let mut vectors = DMatrix::zeros(cfg.n_classes + cfg.n_distractors, cfg.wordvec_dim);
    vectors.rows_mut(0, cfg.n_classes).copy_from(&wordvec_prototypes);
    vectors.rows_mut(cfg.n_classes, cfg.n_distractors).copy_from(&distractors);
    let mut words = classes.clone();
    words.extend(class_names("word", cfg.n_distractors));
    let vocabulary = Vocabulary::new(words, vectors)?;

    let shift = SemanticShift::random(&mut rng, cfg.attribute_dim, cfg.aux_shift, 1.0);
    let aux_centres = gaussian(&mut rng, cfg.n_aux_classes, d);
    let (z_aux, _) = instances(&mut rng, &aux_centres, cfg.instances_per_class, cfg.latent_sigma);
    let m = z_aux.nrows();
    let aux_features = &z_aux * &h_x + gaussian(&mut rng, m, cfg.feature_dim) * cfg.view_noise;
    let aux_attributes = shift.apply(&(&z_aux * &h_a)) + gaussian(&mut rng, m, cfg.attribute_dim) * cfg.view_noise;

    Ok(SharedLatentData {
        features,
        attributes,
        wordvecs,
        attribute_truth,
        labels,
        classes,
        attribute_prototypes,
        wordvec_prototypes,
        vocabulary,
        aux_features,
        aux_attributes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn small() -> SynthConfig {
        SynthConfig {
            n_aux_classes: 4,
            n_target_classes: 3,
            instances_per_class: 5,
            n_distractors: 3,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn zero_shift_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = SemanticShift::random(&mut rng, 5, 0.0, 2.0);
        assert!(max_abs(&(s.rotation - DMatrix::identity(5, 5))) < 1e-15);
        assert_eq!(s.translation.norm(), 0.0);
    }

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SemanticShift::random(&mut rng, 6, 0.7, 1.0);
        let r = &s.rotation;
        assert!(max_abs(&(r.transpose() * r - DMatrix::identity(6, 6))) < 1e-12);
        assert!((s.translation.norm() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_files() {
        let data = generate_synthetic(&small()).unwrap();
        let again = generate_synthetic(&small()).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        data.write(a.path()).unwrap();
        again.write(b.path()).unwrap();
        for entry in std::fs::read_dir(a.path()).unwrap() {
            let name = entry.unwrap().file_name();
            let x = std::fs::read(a.path().join(&name)).unwrap();
            let y = std::fs::read(b.path().join(&name)).unwrap();
            assert_eq!(x, y, "{name:?}");
        }
    }

    #[test]
    fn written_manifest_loads() {
        let data = generate_synthetic(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        data.write(dir.path()).unwrap();
        let (ds, protos) = crate::data::load_manifest(dir.path().join("manifest.json")).unwrap();
        assert_eq!(ds.n_target(), 15);
        assert_eq!(ds.target_classes(), data.dataset.target_classes());
        let p = protos.unwrap();
        assert_eq!(p.classes(), data.prototypes.classes());
        assert!(max_abs(&(p.get(ViewId::Attributes).unwrap() - data.prototypes.get(ViewId::Attributes).unwrap())) == 0.0);
    }

    #[test]
    fn target_prototypes_are_class_means() {
        let data = generate_synthetic(&small()).unwrap();
        let labels = data.dataset.target_labels().unwrap();
        let a = &data.truth.target_attributes;
        let protos = data.prototypes.get(ViewId::Attributes).unwrap();
        for c in 0..3 {
            let rows: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] == c).collect();
            for d in 0..a.ncols() {
                let mean = rows.iter().map(|&k| a[(k, d)]).sum::<f64>() / rows.len() as f64;
                assert!((mean - protos[(c, d)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_dims_rejected() {
        let cfg = SynthConfig {
            feature_dim: 1,
            ..small()
        };
        assert!(generate_synthetic(&cfg).is_err());
    }

    #[test]
    fn shared_latent_shapes() {
        let data = generate_shared_latent(&SharedLatentConfig::default()).unwrap();
        assert_eq!(data.features.shape(), (320, 30));
        assert_eq!(data.vocabulary.len(), 108);
        assert!(data.attribute_truth.iter().all(|&v| v == 0.0 || v == 1.0));
    }
}
