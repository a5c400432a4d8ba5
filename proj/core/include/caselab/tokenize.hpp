#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace caselab {

struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0; // exclusive

    std::size_t length() const noexcept { return end > start ? end - start : 0; }
    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// Size of the position intersection of two half-open spans.
inline std::size_t intersection_length(CharSpan a, CharSpan b) noexcept {
    const std::size_t lo = a.start > b.start ? a.start : b.start;
    const std::size_t hi = a.end < b.end ? a.end : b.end;
    return hi > lo ? hi - lo : 0;
}

struct Token {
    std::string surface;
    std::size_t char_start = 0;
    std::size_t char_end = 0;

    CharSpan span() const noexcept { return {char_start, char_end}; }
    std::size_t length() const noexcept { return char_end - char_start; }
    friend bool operator==(const Token&, const Token&) = default;
};

struct TokenizedText {
    std::string source_ref;
    std::size_t length_chars = 0;
    std::vector<Token> tokens;
    std::vector<bool> stopword_mask; // parallel to tokens

    friend bool operator==(const TokenizedText&, const TokenizedText&) = default;

    /// Surfaces of tokens not masked as stopwords, in text order.
    std::vector<std::string> content_terms() const;
};

struct SentenceSpan {
    std::size_t index = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;

    CharSpan span() const noexcept { return {char_start, char_end}; }
    friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

class StopwordSet {
public:
    StopwordSet() = default;
    explicit StopwordSet(std::vector<std::string> words);

    /// One word per line, UTF-8. Blank lines and lines starting with '#' are skipped.
    static StopwordSet load(const std::filesystem::path& path);

    bool contains(std::string_view word) const;
    bool empty() const noexcept { return words_.empty(); }
    std::size_t size() const noexcept { return words_.size(); }
    /// Sorted, for serialization and fingerprinting.
    std::vector<std::string> sorted_words() const;

private:
    std::unordered_set<std::string> words_;
};

/// Segments text into tokens with code-point offsets.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<Token> segment(std::string_view text) const = 0;
    virtual std::string name() const = 0;
    virtual std::string fingerprint() const = 0;
};

/// Splits on Unicode whitespace. Punctuation stays attached.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<Token> segment(std::string_view text) const override;
    std::string name() const override { return "whitespace"; }
    std::string fingerprint() const override;
};

/// Greedy forward longest-match against a lexicon. Unmatched positions fall back
/// to a run of ASCII letters/digits, otherwise to a single character. Whitespace
/// and punctuation are skipped.
class MaxMatchTokenizer final : public Tokenizer {
public:
    explicit MaxMatchTokenizer(const std::vector<std::string>& lexicon);

    /// Lexicon file: one word per line, UTF-8.
    static std::vector<std::string> load_lexicon(const std::filesystem::path& path);

    std::vector<Token> segment(std::string_view text) const override;
    std::string name() const override { return "maxmatch"; }
    std::string fingerprint() const override;

private:
    std::unordered_set<std::u32string> lexicon_;
    std::size_t max_word_length_ = 1;
    std::string fingerprint_;
};

struct TokenizerConfig {
    std::string name = "whitespace"; // "whitespace" | "maxmatch"
    std::vector<std::string> lexicon;
    std::vector<std::string> stopwords;

    /// Reads lexicon/stopword files into the config. Empty paths are ignored.
    static TokenizerConfig from_files(std::string name,
                                      const std::filesystem::path& lexicon_path,
                                      const std::filesystem::path& stopwords_path);
};

/// Throws ConfigError for an unknown tokenizer name.
std::unique_ptr<Tokenizer> make_tokenizer(const TokenizerConfig& config);

/// A tokenizer bundled with its stopword list. Immutable; safe to share across threads.
class Analyzer {
public:
    explicit Analyzer(TokenizerConfig config = {});

    TokenizedText tokenize(std::string_view text, std::string source_ref = {}) const;

    const TokenizerConfig& config() const noexcept { return config_; }
    const StopwordSet& stopwords() const noexcept { return stopwords_; }
    /// Identifies tokenizer + lexicon + stopword list.
    const std::string& fingerprint() const noexcept { return fingerprint_; }

private:
    TokenizerConfig config_;
    std::unique_ptr<Tokenizer> tokenizer_;
    StopwordSet stopwords_;
    std::string fingerprint_;
};

TokenizedText tokenize(std::string_view text, const TokenizerConfig& config);

inline constexpr std::u32string_view kDefaultSentenceTerminators = U"。！？；!?;\n";

/// Splits at terminator characters. Spans exclude terminators; empty spans are dropped.
std::vector<SentenceSpan> split_sentences(std::string_view text,
                                          std::u32string_view terminators = kDefaultSentenceTerminators);

/// Sentence texts for split_sentences(text).
std::vector<std::string> sentence_texts(std::string_view text,
                                        std::u32string_view terminators = kDefaultSentenceTerminators);

/// A token is salient iff its span intersects any annotation span.
/// Throws ValidationError when a span lies outside [0, tok.length_chars].
std::vector<bool> mark_salient_words(const TokenizedText& tok, const std::vector<CharSpan>& spans);

} // namespace caselab
