#pragma once

#include "freephish/common.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace freephish {

class UndefinedSimilarityError : public Error {
public:
    explicit UndefinedSimilarityError(const std::string& message) : Error("undefined", message) {}
};

/// Unit-cost insert/delete/substitute distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// levenshtein / max(|a|, |b|); 0 for two empty strings.
double normalized_distance(std::string_view a, std::string_view b);

/// 1 - normalized_distance.
double string_similarity(std::string_view a, std::string_view b);

using TagSequence = std::vector<std::string>;

/// Start tags in document order, each rendered as <name attr="value" ...>
/// with names lowercased, values lowercased and whitespace-collapsed.
TagSequence extract_tags(std::string_view body);

struct DirectionalResult {
    double score = 0.0;
    std::vector<double> per_tag_max;
};

/// For each tag of `a`, its best similarity against all of `b`; score is the
/// median. Throws UndefinedSimilarityError when `a` is empty.
/// `threads` 0 picks hardware concurrency; the result does not depend on it.
DirectionalResult directional_similarity(const TagSequence& a, const TagSequence& b, unsigned threads = 1);

struct SimilarityOptions {
    std::size_t cap = 5000;  // longer sequences are sampled down to this many tags
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct SimilarityResult {
    double sim_a_to_b = 0.0;
    double sim_b_to_a = 0.0;
    double overall = 0.0;
    std::vector<double> per_tag_max;  // a -> b
    bool approximate = false;
};

SimilarityResult site_similarity(const TagSequence& a, const TagSequence& b, const SimilarityOptions& opts = {});

/// Uniform sample of `cap` tags without replacement, original order kept.
TagSequence sample_tags(const TagSequence& tags, std::size_t cap, std::uint64_t seed);

}  // namespace freephish
