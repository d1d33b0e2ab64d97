//! Black-box uncertainty from sampled generation texts: a pairwise similarity
//! graph over the samples and the spectrum of its symmetric normalized
//! Laplacian `L = I - D^{-1/2} W D^{-1/2}`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix, SymmetricEigen};
use crate::nlg::rouge::{rouge_l_tokens, tokenize};
use crate::scalar::Scalar;

/// Default edge threshold for semantic-set detection.
pub const DEFAULT_SET_THRESHOLD: f64 = 0.5;

const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    #[default]
    LexicalRougeL,
    EmbeddingCosine,
}

/// What the similarity is computed from.
pub enum SimilarityInput<'a, T> {
    Texts(&'a [&'a str]),
    Embeddings(&'a [Vec<T>]),
}

#[derive(Debug, Clone)]
pub struct SimilarityGraph<T> {
    weights: Matrix<T>,
    spectrum: OnceLock<SymmetricEigen<T>>,
}

impl<T: Scalar> SimilarityGraph<T> {
    /// Validates a weight matrix: square, symmetric, unit diagonal, entries in `[0, 1]`.
    pub fn from_weights(weights: Matrix<T>) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(Error::OutOfRange("similarity matrix must be square and non-empty".into()));
        }
        if weights.max_asymmetry() > T::lit(SYMMETRY_TOL) {
            return Err(Error::OutOfRange("similarity matrix is not symmetric".into()));
        }
        let n = weights.rows();
        for i in 0..n {
            if weights[(i, i)] != T::one() {
                return Err(Error::OutOfRange(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !(w >= T::zero() && w <= T::one()) {
                    return Err(Error::OutOfRange(format!("weight ({i},{j}) = {w} outside [0, 1]")));
                }
            }
        }
        Ok(Self {
            weights,
            spectrum: OnceLock::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn laplacian(&self) -> Matrix<T> {
        let n = self.size();
        let inv_sqrt_deg: Vec<T> = (0..n)
            .map(|i| {
                let d: T = self.weights.row(i).iter().copied().sum();
                assert!(d > T::zero(), "row sum of a unit-diagonal graph is positive");
                T::one() / d.sqrt()
            })
            .collect();
        Matrix::from_fn(n, n, |i, j| {
            let delta = if i == j { T::one() } else { T::zero() };
            delta - inv_sqrt_deg[i] * self.weights[(i, j)] * inv_sqrt_deg[j]
        })
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors of the Laplacian,
    /// computed on first use.
    pub fn spectrum(&self) -> &SymmetricEigen<T> {
        self.spectrum.get_or_init(|| {
            symmetric_eigen(&self.laplacian()).expect("laplacian is square")
        })
    }
}

fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let dot: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    let na: T = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let nb: T = b.iter().map(|&x| x * x).sum::<T>().sqrt();
    if na == T::zero() || nb == T::zero() {
        T::zero()
    } else {
        dot / (na * nb)
    }
}

/// Similarity graph over `M ≥ 2` samples; off-diagonal weights are clipped to `[0, 1]`.
pub fn pairwise_similarity<T: Scalar>(input: SimilarityInput<'_, T>) -> Result<SimilarityGraph<T>> {
    let sim: Box<dyn Fn(usize, usize) -> T + '_>;
    let m = match input {
        SimilarityInput::Texts(texts) => {
            let tokens: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
            let m = tokens.len();
            sim = Box::new(move |i, j| rouge_l_tokens(&tokens[i], &tokens[j]));
            m
        }
        SimilarityInput::Embeddings(vectors) => {
            if let Some(bad) = vectors.iter().find(|v| v.len() != vectors[0].len()) {
                return Err(Error::LengthMismatch {
                    expected: vectors[0].len(),
                    actual: bad.len(),
                });
            }
            sim = Box::new(move |i, j| cosine(&vectors[i], &vectors[j]));
            vectors.len()
        }
    };
    if m < 2 {
        return Err(Error::MissingInput("black-box methods need multiple samples".into()));
    }
    let mut w = Matrix::identity(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let s = sim(i, j).max(T::zero()).min(T::one());
            w[(i, j)] = s;
            w[(j, i)] = s;
        }
    }
    SimilarityGraph::from_weights(w)
}

/// Number of connected components when samples are joined by edges of weight
/// at least `threshold`.
pub fn num_sets<T: Scalar>(graph: &SimilarityGraph<T>, threshold: T) -> usize {
    let n = graph.size();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for i in 0..n {
        for j in (i + 1)..n {
            if graph.weights[(i, j)] >= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                    components -= 1;
                }
            }
        }
    }
    components
}

pub fn laplacian_spectrum<T: Scalar>(graph: &SimilarityGraph<T>) -> (&[T], &Matrix<T>) {
    let s = graph.spectrum();
    (&s.values, &s.vectors)
}

/// `Σ_k max(0, 1 - λ_k)`.
pub fn eigv<T: Scalar>(graph: &SimilarityGraph<T>) -> T {
    graph
        .spectrum()
        .values
        .iter()
        .map(|&l| (T::one() - l).max(T::zero()))
        .sum()
}

/// Spread of the samples' spectral embeddings: rows of the first `k`
/// eigenvectors, centred on their mean row, measured by Frobenius norm.
pub fn ecc<T: Scalar>(graph: &SimilarityGraph<T>, k: usize) -> Result<T> {
    let m = graph.size();
    if k == 0 || k > m {
        return Err(Error::OutOfRange(format!("ECC needs 1 <= k <= {m}, got {k}")));
    }
    let vectors = &graph.spectrum().vectors;
    let mut total = T::zero();
    for c in 0..k {
        let col = vectors.column(c);
        let mean = col.iter().copied().sum::<T>() / T::from_count(m);
        total = total + col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    }
    Ok(total.sqrt())
}

/// ECC with `k = round(EigV)`, clamped to `[1, M]`.
pub fn ecc_default<T: Scalar>(graph: &SimilarityGraph<T>) -> T {
    let k = eigv(graph).round().to_usize().unwrap_or(1).clamp(1, graph.size());
    ecc(graph, k).expect("k clamped into range")
}

/// `1 -` mean pairwise ROUGE-L similarity between the samples.
pub fn lexsim<T: Scalar>(samples: &[&str]) -> Result<T> {
    let graph = pairwise_similarity::<T>(SimilarityInput::Texts(samples))?;
    Ok(lexsim_from_graph(&graph))
}

pub fn lexsim_from_graph<T: Scalar>(graph: &SimilarityGraph<T>) -> T {
    let m = graph.size();
    let mut sum = T::zero();
    for i in 0..m {
        for j in (i + 1)..m {
            sum = sum + graph.weights[(i, j)];
        }
    }
    T::one() - sum / T::from_count(m * (m - 1) / 2)
}
