//! Image selection, question classification and weak supervision for
//! multimodal clarifying questions.

mod classifier;
mod embedding;
mod weak_label;

pub use classifier::{classify_question, train_classifier, ClassifierSample, ReferenceClassifier};
pub use embedding::{
    cosine, hash_embed, load_embeddings, parse_embeddings, select_images, EmbeddingStore, EMBEDDING_HEADER,
};
pub use weak_label::{
    aggregate_weak_labels, label_for_delta, load_weak_labels, parse_weak_labels, weak_label, weak_labels_to_jsonl,
    ClassLabel, WeakLabel, WeakLabelRecord,
};
