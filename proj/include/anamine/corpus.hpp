#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace anamine {

struct ProductDoc {
    std::string id;
    std::string title;
    std::string text;
    std::vector<std::string> tokens;  // lowercased, nonempty, no whitespace
};

// One annotator's binary token flags for one product. Flag vectors have
// exactly the length of the product's token sequence.
struct AnnotationRecord {
    std::string product_id;
    std::string annotator_id;
    std::vector<std::uint8_t> purpose_flags;
    std::vector<std::uint8_t> mechanism_flags;
};

struct AnnotationSet {
    std::string product_id;
    std::vector<AnnotationRecord> records;  // distinct annotator_ids
};

// Half-open character span [begin, end) over the raw product text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct RawAnnotation {
    std::string annotator_id;
    std::vector<Span> purpose_spans;
    std::vector<Span> mechanism_spans;
};

struct TokenSpan {
    std::string token;
    std::size_t begin = 0;  // byte offset in the original text
    std::size_t end = 0;
};

// Lowercases and splits on any character that is not a letter, digit,
// apostrophe, or hyphen; tokens without a letter or digit are dropped.
// Returns an empty vector for texts with no usable tokens.
std::vector<std::string> tokenize(std::string_view text);

// Same rule, keeping each token's character range in the original text.
std::vector<TokenSpan> tokenize_with_offsets(std::string_view text);

class Corpus {
public:
    void add(ProductDoc doc);  // throws on duplicate id

    const std::vector<ProductDoc>& docs() const { return docs_; }
    std::size_t size() const { return docs_.size(); }
    bool has(const std::string& id) const { return by_id_.count(id) > 0; }
    const ProductDoc& doc(const std::string& id) const;

private:
    std::vector<ProductDoc> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

// JSONL, one object per line: id (string), title (string, optional),
// text (string). Documents whose token sequence is empty after filtering
// are skipped with a warning on stderr.
Corpus load_corpus(const std::filesystem::path& path);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Converts character-span annotations into binary token flags: a token's
// flag is 1 iff its character range overlaps any span of that label.
// Throws if raw is empty, an annotator_id repeats, or a span is out of
// bounds (including end < begin).
AnnotationSet align_annotations(const ProductDoc& doc,
                                const std::vector<RawAnnotation>& raw);

// Annotation JSONL: product_id, annotator_id, purpose_spans and
// mechanism_spans as arrays of [start, end) offsets. Returns one set per
// annotated product, in corpus order.
std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path,
                                            const Corpus& corpus);

void save_annotations(const std::vector<AnnotationSet>& sets,
                      const Corpus& corpus,
                      const std::filesystem::path& path);

}  // namespace anamine
