#include "anamine/corpus.hpp"

#include <cctype>
#include <iostream>
#include <map>
#include <stdexcept>

#include "anamine/io.hpp"

namespace anamine {

namespace {

bool is_word_char(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '\'' || c == '-';
}

bool has_letter_or_digit(std::string_view s) {
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) return true;
    }
    return false;
}

}  // namespace

std::vector<TokenSpan> tokenize_with_offsets(std::string_view text) {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && !is_word_char(text[i])) ++i;
        if (i >= n) break;
        const std::size_t begin = i;
        while (i < n && is_word_char(text[i])) ++i;
        std::string_view raw = text.substr(begin, i - begin);
        if (!has_letter_or_digit(raw)) continue;  // pure punctuation
        TokenSpan ts;
        ts.begin = begin;
        ts.end = i;
        ts.token.reserve(raw.size());
        for (char c : raw) {
            ts.token.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        out.push_back(std::move(ts));
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& ts : tokenize_with_offsets(text)) {
        out.push_back(std::move(ts.token));
    }
    return out;
}

void Corpus::add(ProductDoc doc) {
    if (by_id_.count(doc.id)) {
        throw std::runtime_error("duplicate product id: " + doc.id);
    }
    by_id_[doc.id] = docs_.size();
    docs_.push_back(std::move(doc));
}

const ProductDoc& Corpus::doc(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw std::runtime_error("unknown product id: " + id);
    }
    return docs_[it->second];
}

Corpus load_corpus(const std::filesystem::path& path) {
    Corpus corpus;
    std::size_t skipped = 0;
    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": missing or non-string \"id\" field");
        }
        if (!obj.contains("text") || !obj["text"].is_string()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": missing or non-string \"text\" field");
        }
        ProductDoc doc;
        doc.id = obj["id"].get<std::string>();
        doc.text = obj["text"].get<std::string>();
        if (obj.contains("title")) {
            if (!obj["title"].is_string()) {
                throw std::runtime_error(path.string() + ":" +
                                         std::to_string(line_no) +
                                         ": non-string \"title\" field");
            }
            doc.title = obj["title"].get<std::string>();
        }
        doc.tokens = tokenize(doc.text);
        if (doc.tokens.empty()) {
            std::cerr << "warning: " << path.string() << ":" << line_no
                      << ": document \"" << doc.id
                      << "\" has no tokens after filtering, skipped\n";
            ++skipped;
            return;
        }
        corpus.add(std::move(doc));
    });
    if (corpus.size() == 0) {
        throw std::runtime_error("corpus is empty: " + path.string() +
                                 (skipped ? " (all documents were empty)" : ""));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::vector<json> rows;
    rows.reserve(corpus.size());
    for (const auto& doc : corpus.docs()) {
        json row;
        row["id"] = doc.id;
        if (!doc.title.empty()) row["title"] = doc.title;
        row["text"] = doc.text;
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

AnnotationSet align_annotations(const ProductDoc& doc,
                                const std::vector<RawAnnotation>& raw) {
    if (raw.empty()) {
        throw std::runtime_error("no annotators for product " + doc.id);
    }
    const auto token_spans = tokenize_with_offsets(doc.text);
    if (token_spans.size() != doc.tokens.size()) {
        throw std::runtime_error("token sequence does not match text of product " +
                                 doc.id);
    }

    auto check_spans = [&](const std::vector<Span>& spans) {
        for (const auto& s : spans) {
            if (s.end < s.begin || s.end > doc.text.size()) {
                throw std::runtime_error(
                    "span [" + std::to_string(s.begin) + "," + std::to_string(s.end) +
                    ") out of bounds for product " + doc.id + " (text length " +
                    std::to_string(doc.text.size()) + ")");
            }
        }
    };
    auto flags_for = [&](const std::vector<Span>& spans) {
        std::vector<std::uint8_t> flags(token_spans.size(), 0);
        for (std::size_t t = 0; t < token_spans.size(); ++t) {
            for (const auto& s : spans) {
                if (token_spans[t].begin < s.end && s.begin < token_spans[t].end) {
                    flags[t] = 1;
                    break;
                }
            }
        }
        return flags;
    };

    AnnotationSet set;
    set.product_id = doc.id;
    for (const auto& ann : raw) {
        for (const auto& prev : set.records) {
            if (prev.annotator_id == ann.annotator_id) {
                throw std::runtime_error("duplicate annotator \"" + ann.annotator_id +
                                         "\" for product " + doc.id);
            }
        }
        check_spans(ann.purpose_spans);
        check_spans(ann.mechanism_spans);
        AnnotationRecord rec;
        rec.product_id = doc.id;
        rec.annotator_id = ann.annotator_id;
        rec.purpose_flags = flags_for(ann.purpose_spans);
        rec.mechanism_flags = flags_for(ann.mechanism_spans);
        set.records.push_back(std::move(rec));
    }
    return set;
}

namespace {

std::vector<Span> parse_spans(const json& arr, const std::string& where) {
    if (!arr.is_array()) {
        throw std::runtime_error(where + ": spans must be an array");
    }
    std::vector<Span> spans;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
            !e[1].is_number_unsigned()) {
            throw std::runtime_error(where +
                                     ": each span must be a [start, end) pair of "
                                     "non-negative integers");
        }
        spans.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    }
    return spans;
}

}  // namespace

std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path,
                                            const Corpus& corpus) {
    // product id -> raw annotations, accumulated across lines
    std::map<std::string, std::vector<RawAnnotation>> raw;
    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        const std::string where = path.string() + ":" + std::to_string(line_no);
        for (const char* field : {"product_id", "annotator_id"}) {
            if (!obj.contains(field) || !obj[field].is_string()) {
                throw std::runtime_error(where + ": missing or non-string \"" +
                                         field + "\"");
            }
        }
        const std::string product_id = obj["product_id"].get<std::string>();
        if (!corpus.has(product_id)) {
            throw std::runtime_error(where + ": annotation references unknown product \"" +
                                     product_id + "\"");
        }
        RawAnnotation ann;
        ann.annotator_id = obj["annotator_id"].get<std::string>();
        if (obj.contains("purpose_spans")) {
            ann.purpose_spans = parse_spans(obj["purpose_spans"], where);
        }
        if (obj.contains("mechanism_spans")) {
            ann.mechanism_spans = parse_spans(obj["mechanism_spans"], where);
        }
        raw[product_id].push_back(std::move(ann));
    });

    std::vector<AnnotationSet> sets;
    for (const auto& doc : corpus.docs()) {
        auto it = raw.find(doc.id);
        if (it == raw.end()) continue;
        sets.push_back(align_annotations(doc, it->second));
    }
    return sets;
}

void save_annotations(const std::vector<AnnotationSet>& sets,
                      const Corpus& corpus,
                      const std::filesystem::path& path) {
    std::vector<json> rows;
    for (const auto& set : sets) {
        const auto& doc = corpus.doc(set.product_id);
        const auto token_spans = tokenize_with_offsets(doc.text);
        auto spans_for = [&](const std::vector<std::uint8_t>& flags) {
            json arr = json::array();
            for (std::size_t t = 0; t < flags.size(); ++t) {
                if (flags[t]) arr.push_back({token_spans[t].begin, token_spans[t].end});
            }
            return arr;
        };
        for (const auto& rec : set.records) {
            json row;
            row["product_id"] = rec.product_id;
            row["annotator_id"] = rec.annotator_id;
            row["purpose_spans"] = spans_for(rec.purpose_flags);
            row["mechanism_spans"] = spans_for(rec.mechanism_flags);
            rows.push_back(std::move(row));
        }
    }
    write_jsonl(path, rows);
}

}  // namespace anamine
