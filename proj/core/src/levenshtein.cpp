#include "caselab/levenshtein.hpp"

#include <algorithm>
#include <vector>

#include "caselab/utf8.hpp"

namespace caselab {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    // b is the shorter string; keep one row of |b| + 1 cells.
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t above = row[j];
            const std::size_t substitute = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({above + 1, row[j - 1] + 1, substitute});
            diagonal = above;
        }
    }
    return row[b.size()];
}

std::size_t levenshtein(std::string_view a_utf8, std::string_view b_utf8) {
    return levenshtein(utf8::decode(a_utf8), utf8::decode(b_utf8));
}

std::size_t nearest_by_edit_distance(std::string_view unit, std::span<const std::string> candidates) {
    const std::u32string u = utf8::decode(unit);
    std::size_t best = 0;
    std::size_t best_distance = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::size_t d = levenshtein(u, utf8::decode(candidates[i]));
        if (d < best_distance) {
            best = i;
            best_distance = d;
        }
    }
    return best;
}

} // namespace caselab
