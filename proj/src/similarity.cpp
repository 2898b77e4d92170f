#include "freephish/similarity.hpp"

#include "freephish/html.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <thread>

namespace freephish {

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
            diag = up;
        }
    }
    return row[b.size()];
}

double normalized_distance(std::string_view a, std::string_view b) {
    const std::size_t m = std::max(a.size(), b.size());
    if (m == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

double string_similarity(std::string_view a, std::string_view b) { return 1.0 - normalized_distance(a, b); }

namespace {

std::string collapse_ws(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = !out.empty();
            continue;
        }
        if (pending) out += ' ';
        pending = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

TagSequence extract_tags(std::string_view body) {
    TagSequence out;
    for (const auto& t : html::tokenize(body)) {
        if (t.kind != html::TokenKind::start_tag) continue;
        std::string tag = "<" + t.name;
        for (const auto& a : t.attributes) {
            tag += ' ';
            tag += a.name;
            if (a.has_value) {
                std::string v = collapse_ws(a.value);
                std::string escaped;
                for (char c : v) escaped += c == '"' ? std::string("&quot;") : std::string(1, c);
                tag += "=\"" + escaped + "\"";
            }
        }
        tag += '>';
        out.push_back(std::move(tag));
    }
    return out;
}

namespace {

double best_match(const std::string& t, const TagSequence& b) {
    double best = 0.0;
    for (const auto& u : b) {
        const double longest = static_cast<double>(std::max(t.size(), u.size()));
        const double diff = static_cast<double>(t.size() > u.size() ? t.size() - u.size() : u.size() - t.size());
        // the length gap alone bounds the distance from below
        if (1.0 - diff / longest <= best) continue;
        best = std::max(best, string_similarity(t, u));
        if (best >= 1.0) break;
    }
    return best;
}

}  // namespace

DirectionalResult directional_similarity(const TagSequence& a, const TagSequence& b, unsigned threads) {
    if (a.empty()) throw UndefinedSimilarityError("similarity from an empty tag sequence is undefined");
    DirectionalResult r;
    r.per_tag_max.assign(a.size(), 0.0);
    if (!b.empty()) {
        if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, a.size()));
        if (threads <= 1) {
            for (std::size_t i = 0; i < a.size(); ++i) r.per_tag_max[i] = best_match(a[i], b);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < threads; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t i = w; i < a.size(); i += threads) r.per_tag_max[i] = best_match(a[i], b);
                });
            for (auto& th : pool) th.join();
        }
    }
    r.score = median(r.per_tag_max);
    return r;
}

TagSequence sample_tags(const TagSequence& tags, std::size_t cap, std::uint64_t seed) {
    if (tags.size() <= cap) return tags;
    std::vector<std::size_t> idx(tags.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < cap; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    TagSequence out;
    out.reserve(cap);
    for (auto i : idx) out.push_back(tags[i]);
    return out;
}

SimilarityResult site_similarity(const TagSequence& a, const TagSequence& b, const SimilarityOptions& opts) {
    if (a.empty() || b.empty()) throw UndefinedSimilarityError("site similarity needs two non-empty tag sequences");
    if (opts.cap == 0) throw PreconditionError("similarity cap must be positive");
    SimilarityResult r;
    r.approximate = a.size() > opts.cap || b.size() > opts.cap;
    // seeds depend only on each sequence, so swapping a and b swaps the samples too
    const TagSequence sa = sample_tags(a, opts.cap, mix_seed(opts.seed, a.size()));
    const TagSequence sb = sample_tags(b, opts.cap, mix_seed(opts.seed, b.size()));
    auto ab = directional_similarity(sa, sb, opts.threads);
    r.sim_a_to_b = ab.score;
    r.sim_b_to_a = directional_similarity(sb, sa, opts.threads).score;
    r.overall = (r.sim_a_to_b + r.sim_b_to_a) / 2.0;
    r.per_tag_max = std::move(ab.per_tag_max);
    return r;
}

}  // namespace freephish
