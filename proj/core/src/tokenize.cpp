#include "caselab/tokenize.hpp"

#include <algorithm>

#include "caselab/error.hpp"
#include "caselab/utf8.hpp"
#include "caselab/util.hpp"

namespace caselab {

std::vector<std::string> TokenizedText::content_terms() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i >= stopword_mask.size() || !stopword_mask[i]) {
            out.push_back(tokens[i].surface);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stopwords

StopwordSet::StopwordSet(std::vector<std::string> words) {
    for (auto& w : words) {
        std::string t = trim_unicode(w);
        if (!t.empty()) {
            words_.insert(std::move(t));
        }
    }
}

StopwordSet StopwordSet::load(const std::filesystem::path& path) {
    std::vector<std::string> words;
    for (const auto& line : split_lines(read_file(path))) {
        std::string t = trim_unicode(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        words.push_back(std::move(t));
    }
    return StopwordSet(std::move(words));
}

bool StopwordSet::contains(std::string_view word) const {
    return words_.find(std::string(word)) != words_.end();
}

std::vector<std::string> StopwordSet::sorted_words() const {
    std::vector<std::string> out(words_.begin(), words_.end());
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Tokenizers

std::vector<Token> WhitespaceTokenizer::segment(std::string_view text) const {
    const std::u32string chars = utf8::decode(text);
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < chars.size()) {
        if (utf8::is_space(chars[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < chars.size() && !utf8::is_space(chars[j])) {
            ++j;
        }
        tokens.push_back({utf8::encode(std::u32string_view(chars).substr(i, j - i)), i, j});
        i = j;
    }
    return tokens;
}

std::string WhitespaceTokenizer::fingerprint() const {
    return caselab::fingerprint("whitespace");
}

MaxMatchTokenizer::MaxMatchTokenizer(const std::vector<std::string>& lexicon) {
    std::vector<std::string> sorted;
    for (const auto& w : lexicon) {
        std::string t = trim_unicode(w);
        if (t.empty()) {
            continue;
        }
        std::u32string chars = utf8::decode(t);
        max_word_length_ = std::max(max_word_length_, chars.size());
        if (lexicon_.insert(std::move(chars)).second) {
            sorted.push_back(std::move(t));
        }
    }
    std::sort(sorted.begin(), sorted.end());
    std::string joined = "maxmatch";
    for (const auto& w : sorted) {
        joined += '\n';
        joined += w;
    }
    fingerprint_ = caselab::fingerprint(joined);
}

std::vector<std::string> MaxMatchTokenizer::load_lexicon(const std::filesystem::path& path) {
    std::vector<std::string> words;
    for (const auto& line : split_lines(read_file(path))) {
        std::string t = trim_unicode(line);
        if (!t.empty()) {
            words.push_back(std::move(t));
        }
    }
    return words;
}

std::vector<Token> MaxMatchTokenizer::segment(std::string_view text) const {
    const std::u32string chars = utf8::decode(text);
    const std::u32string_view view(chars);
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < chars.size()) {
        const char32_t c = chars[i];
        if (utf8::is_space(c) || utf8::is_punct(c)) {
            ++i;
            continue;
        }
        std::size_t len = 0;
        const std::size_t longest = std::min(max_word_length_, chars.size() - i);
        for (std::size_t l = longest; l >= 1; --l) {
            if (lexicon_.count(std::u32string(view.substr(i, l))) != 0) {
                len = l;
                break;
            }
        }
        if (len == 0) {
            if (utf8::is_ascii_alnum(c)) {
                std::size_t j = i;
                while (j < chars.size() && utf8::is_ascii_alnum(chars[j])) {
                    ++j;
                }
                len = j - i;
            } else {
                len = 1;
            }
        }
        tokens.push_back({utf8::encode(view.substr(i, len)), i, i + len});
        i += len;
    }
    return tokens;
}

std::string MaxMatchTokenizer::fingerprint() const {
    return fingerprint_;
}

TokenizerConfig TokenizerConfig::from_files(std::string name, const std::filesystem::path& lexicon_path,
                                            const std::filesystem::path& stopwords_path) {
    TokenizerConfig config;
    config.name = std::move(name);
    if (!lexicon_path.empty()) {
        config.lexicon = MaxMatchTokenizer::load_lexicon(lexicon_path);
    }
    if (!stopwords_path.empty()) {
        config.stopwords = StopwordSet::load(stopwords_path).sorted_words();
    }
    return config;
}

std::unique_ptr<Tokenizer> make_tokenizer(const TokenizerConfig& config) {
    if (config.name == "whitespace") {
        return std::make_unique<WhitespaceTokenizer>();
    }
    if (config.name == "maxmatch") {
        return std::make_unique<MaxMatchTokenizer>(config.lexicon);
    }
    throw ConfigError("unknown tokenizer '" + config.name + "' (expected whitespace or maxmatch)");
}

// ---------------------------------------------------------------------------
// Analyzer

Analyzer::Analyzer(TokenizerConfig config)
    : config_(std::move(config)), tokenizer_(make_tokenizer(config_)), stopwords_(config_.stopwords) {
    std::string joined = tokenizer_->name() + '\x1f' + tokenizer_->fingerprint();
    for (const auto& w : stopwords_.sorted_words()) {
        joined += '\x1f';
        joined += w;
    }
    fingerprint_ = caselab::fingerprint(joined);
}

TokenizedText Analyzer::tokenize(std::string_view text, std::string source_ref) const {
    TokenizedText out;
    out.source_ref = std::move(source_ref);
    out.length_chars = utf8::length(text);
    out.tokens = tokenizer_->segment(text);
    out.stopword_mask.reserve(out.tokens.size());
    for (const auto& t : out.tokens) {
        out.stopword_mask.push_back(stopwords_.contains(t.surface));
    }
    return out;
}

TokenizedText tokenize(std::string_view text, const TokenizerConfig& config) {
    return Analyzer(config).tokenize(text);
}

// ---------------------------------------------------------------------------
// Sentences and salience

std::vector<SentenceSpan> split_sentences(std::string_view text, std::u32string_view terminators) {
    const std::u32string chars = utf8::decode(text);
    std::vector<SentenceSpan> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= chars.size(); ++i) {
        const bool boundary = i == chars.size() || terminators.find(chars[i]) != std::u32string_view::npos;
        if (!boundary) {
            continue;
        }
        if (i > start) {
            out.push_back({out.size(), start, i});
        }
        start = i + 1;
    }
    return out;
}

std::vector<std::string> sentence_texts(std::string_view text, std::u32string_view terminators) {
    const std::u32string chars = utf8::decode(text);
    std::vector<std::string> out;
    for (const auto& s : split_sentences(text, terminators)) {
        out.push_back(utf8::encode(std::u32string_view(chars).substr(s.char_start, s.char_end - s.char_start)));
    }
    return out;
}

std::vector<bool> mark_salient_words(const TokenizedText& tok, const std::vector<CharSpan>& spans) {
    for (const auto& s : spans) {
        if (s.start >= s.end || s.end > tok.length_chars) {
            throw ValidationError("annotation span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                                      ") outside text of length " + std::to_string(tok.length_chars),
                                  {tok.source_ref});
        }
    }
    std::vector<bool> flags(tok.tokens.size(), false);
    for (std::size_t i = 0; i < tok.tokens.size(); ++i) {
        const CharSpan t = tok.tokens[i].span();
        flags[i] = std::any_of(spans.begin(), spans.end(),
                               [&](const CharSpan& s) { return intersection_length(t, s) > 0; });
    }
    return flags;
}

} // namespace caselab
