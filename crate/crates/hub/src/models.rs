/// A public BERT checkpoint with the published statistics of its vocabulary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownModel {
    pub language: &'static str,
    pub model_id: &'static str,
    pub vocab_size: usize,
    /// Share of the vocabulary also present in the multilingual vocabulary, in percent.
    pub percent_in_multilingual: f64,
    pub uncased: bool,
    /// Tokenizes one character at a time instead of WordPiece.
    pub character_level: bool,
}

const fn model(
    language: &'static str,
    model_id: &'static str,
    vocab_size: usize,
    percent_in_multilingual: f64,
) -> KnownModel {
    KnownModel {
        language,
        model_id,
        vocab_size,
        percent_in_multilingual,
        uncased: false,
        character_level: false,
    }
}

pub const MULTILINGUAL_MODEL: &str = "bert-base-multilingual-cased";

pub const KNOWN_MODELS: [KnownModel; 10] = [
    model("multi", MULTILINGUAL_MODEL, 119_547, 100.0),
    model("ar", "aubmindlab/bert-base-arabertv01", 64_000, 5.6),
    model("en", "bert-base-cased", 28_996, 66.4),
    model("fi", "TurkuNLP/bert-base-finnish-cased-v1", 50_105, 14.3),
    KnownModel {
        uncased: true,
        ..model("id", "indobenchmark/indobert-base-p2", 30_521, 40.5)
    },
    KnownModel {
        character_level: true,
        ..model("ja", "cl-tohoku/bert-base-japanese-char", 4_000, 99.1)
    },
    model("ko", "snunlp/KR-BERT-char16424", 16_424, 47.4),
    model("ru", "DeepPavlov/rubert-base-cased", 119_547, 21.1),
    model("tr", "dbmdz/bert-base-turkish-cased", 32_000, 23.0),
    model("zh", "bert-base-chinese", 21_128, 79.4),
];

pub fn known_model(model_id: &str) -> Option<&'static KnownModel> {
    KNOWN_MODELS.iter().find(|m| m.model_id == model_id)
}
