#include "eqir/common.hpp"
#include "eqir/complexity.hpp"
#include "eqir/synthetic.hpp"
#include "eqir/text_analysis.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace eqir;

namespace {

bool has_token(const std::string& text, const std::string& token)
{
    for (const auto& t : index_terms(text)) {
        if (t == token) {
            return true;
        }
    }
    return false;
}

} // namespace

TEST(Synthetic, DeterministicFiles)
{
    testutil::TempDir dir;
    write_synthetic(generate_synthetic_biased(1, 100), dir.file("a"));
    write_synthetic(generate_synthetic_biased(1, 100), dir.file("b"));
    EXPECT_EQ(testutil::tree_snapshot(dir.path() / "a"), testutil::tree_snapshot(dir.path() / "b"));
    write_synthetic(generate_synthetic_biased(2, 100), dir.file("c"));
    EXPECT_NE(testutil::tree_snapshot(dir.path() / "a"), testutil::tree_snapshot(dir.path() / "c"));
}

TEST(Synthetic, RejectsTinyQuerySets)
{
    EXPECT_THROW(generate_synthetic_biased(1, 39), UsageError);
    EXPECT_NO_THROW(generate_synthetic_biased(1, 40));
}

TEST(Synthetic, SplitAndQrelsContract)
{
    const auto data = generate_synthetic_biased(1, 300);
    EXPECT_EQ(data.train_ids.size(), 200u);
    EXPECT_EQ(data.test_ids.size(), 100u);
    std::set<std::string> train(data.train_ids.begin(), data.train_ids.end());
    for (const auto& id : data.test_ids) {
        EXPECT_FALSE(train.contains(id));
    }
    std::set<std::string> doc_ids;
    for (const auto& d : data.corpus) {
        doc_ids.insert(d.id);
    }
    EXPECT_EQ(data.queries.size(), 300u);
    for (const auto& q : data.queries) {
        const auto& judged = data.qrels.at(q.id);
        ASSERT_EQ(judged.size(), 1u) << q.id;
        EXPECT_EQ(judged.begin()->second, 1);
        EXPECT_TRUE(doc_ids.contains(judged.begin()->first));
    }
}

TEST(Synthetic, ArtifactPlantedInSimplePositivesOnly)
{
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const auto data = generate_synthetic_biased(seed, 300);
        std::map<std::string, const Document*> docs;
        for (const auto& d : data.corpus) {
            docs[d.id] = &d;
        }
        std::map<QueryKind, std::pair<int, int>> tally;
        for (const auto& q : data.queries) {
            const auto* pos = docs.at(data.qrels.at(q.id).begin()->first);
            auto& [with, total] = tally[data.kinds.at(q.id)];
            with += has_token(pos->full_text(), "zqx") ? 1 : 0;
            ++total;
        }
        const auto [s_with, s_total] = tally[QueryKind::simple];
        const auto [c_with, c_total] = tally[QueryKind::complex];
        EXPECT_GE(s_with, 0.9 * s_total) << seed;
        EXPECT_LE(c_with, 0.1 * c_total) << seed;
    }
}

TEST(Synthetic, SimpleQueriesAreLessComplex)
{
    const auto data = generate_synthetic_biased(1, 300);
    std::vector<ComplexityInput> inputs;
    for (const auto& q : data.queries) {
        inputs.push_back({q.id, tag_text(q.text)});
    }
    double simple = 0, complex = 0;
    int n_simple = 0, n_complex = 0;
    for (const auto& p : aggregate_scores(inputs)) {
        switch (data.kinds.at(p.query_id)) {
        case QueryKind::simple:
            simple += p.score;
            ++n_simple;
            break;
        case QueryKind::complex:
            complex += p.score;
            ++n_complex;
            break;
        case QueryKind::medium:
            break;
        }
    }
    EXPECT_LT(simple / n_simple, complex / n_complex);
}
