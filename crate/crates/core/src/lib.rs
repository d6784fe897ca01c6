//! Supervised word sense disambiguation workbench.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`]: citations, ambiguous-word instances, sense inventories,
//!   JSONL ingestion and a synthetic pseudo-word generator.
//! * [`textproc`]: tokenization, Porter stemming and the sparse feature
//!   families (unigrams, bigrams, POS window, collocations, concepts,
//!   semantic types).
//! * [`embeddings`]: CBOW word2vec with negative sampling and context
//!   aggregation by sum or average.
//! * [`classifiers`]: Gaussian naive Bayes, SMO linear SVM and cosine KNN.
//! * [`lstm`]: peephole LSTM classifier trained with AdaGrad on a
//!   multi-class hinge loss, plus sequence autoencoder pretraining.
//! * [`eval`]: stratified k-fold cross-validation, macro/micro accuracy,
//!   confidence intervals and randomization significance tests.

pub mod classifiers;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod eval;
pub mod lstm;
pub mod seeds;
pub mod textproc;

pub use error::{Error, Result};

pub use classifiers::{FeatureSpace, KnnModel, NbModel, SvmModel, TrainingMatrix};
pub use corpus::{Citation, Dataset, Instance, SenseInventory, WordType};
pub use embeddings::{DenseVector, EmbeddingModel};
pub use eval::{EvalReport, FoldPlan};
pub use lstm::LstmParams;
pub use textproc::{SparseFeatures, TokenStream};
