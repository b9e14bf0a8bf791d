#include <doctest.h>

#include <set>

#include "shl0/model.hpp"
#include "support.hpp"

using namespace shl0;

TEST_CASE("strong hierarchy check") {
    CHECK(check_strong_hierarchy(ModelAlpha({1, 2}, {{1, 2}})));
    CHECK_FALSE(check_strong_hierarchy(ModelAlpha({1}, {{1, 2}})));
    CHECK(check_strong_hierarchy(ModelAlpha{}));
    CHECK(check_strong_hierarchy(ModelAlpha({3, 7}, {{3, 7}})));
}

TEST_CASE("canonical form: sorted, deduplicated, pairs ordered") {
    ModelAlpha a({5, 1, 3, 1}, {{4, 2}, {2, 4}, {5, 1}});
    CHECK(a.mains() == std::vector<int>{1, 3, 5});
    CHECK(a.interactions() == std::vector<IndexPair>{{1, 5}, {2, 4}});
    CHECK(a.key() == ModelAlpha({1, 3, 5}, {{1, 5}, {2, 4}}).key());
}

TEST_CASE("the four move scenarios") {
    ModelAlpha a({1, 2}, {{1, 2}});

    SUBCASE("removing a main cascades through its interactions") {
        ModelAlpha out = apply_move(a, Move::remove_main(1));
        CHECK(out == ModelAlpha({2}, {}));
    }
    SUBCASE("adding an interaction pulls in missing mains") {
        ModelAlpha out = apply_move(ModelAlpha{}, Move::add_interaction(3, 7));
        CHECK(out == ModelAlpha({3, 7}, {{3, 7}}));
    }
    SUBCASE("removing an interaction keeps both mains") {
        ModelAlpha out = apply_move(a, Move::remove_interaction(1, 2));
        CHECK(out == ModelAlpha({1, 2}, {}));
    }
    SUBCASE("adding a main adds only that main") {
        ModelAlpha out = apply_move(a, Move::add_main(9));
        CHECK(out == ModelAlpha({1, 2, 9}, {{1, 2}}));
    }
    SUBCASE("inapplicable moves throw") {
        CHECK_THROWS_AS(apply_move(a, Move::add_main(1)), InvalidMove);
        CHECK_THROWS_AS(apply_move(a, Move::remove_main(5)), InvalidMove);
        CHECK_THROWS_AS(apply_move(a, Move::remove_interaction(1, 5)), InvalidMove);
        CHECK_THROWS_AS(apply_move(a, Move::add_interaction(1, 2)), InvalidMove);
    }
}

TEST_CASE("every move yields a strong-hierarchy model") {
    const std::vector<int> universe{1, 2, 3, 4};
    for (const ModelAlpha& alpha : testsupport::enumerate_sh_models(4)) {
        for (const Move& m : neighborhood(alpha, universe)) {
            ModelAlpha next = apply_move(alpha, m);
            CHECK(check_strong_hierarchy(next));
            CHECK(next != alpha);
        }
    }
}

TEST_CASE("neighborhood of the empty model over a small active set") {
    std::vector<Move> moves = neighborhood(ModelAlpha{}, {1, 2});
    REQUIRE(moves.size() == 3);
    CHECK(moves[0] == Move::add_main(1));
    CHECK(moves[1] == Move::add_main(2));
    CHECK(moves[2] == Move::add_interaction(1, 2));
}

TEST_CASE("only shrink moves remain when the active set is exhausted") {
    std::vector<Move> moves = neighborhood(ModelAlpha({1}, {}), {1});
    REQUIRE(moves.size() == 1);
    CHECK(moves[0] == Move::remove_main(1));
}

TEST_CASE("neighborhood size of the empty model is d + d(d-1)/2") {
    for (int d = 1; d <= 6; ++d) {
        std::vector<int> universe;
        for (int j = 1; j <= d; ++j) universe.push_back(j);
        CHECK(neighborhood(ModelAlpha{}, universe).size() ==
              std::size_t(d + d * (d - 1) / 2));
    }
}

TEST_CASE("distinct moves yield distinct neighbors") {
    const std::vector<int> universe{1, 2, 3, 4};
    for (const ModelAlpha& alpha : testsupport::enumerate_sh_models(4)) {
        std::set<std::string> seen;
        for (const Move& m : neighborhood(alpha, universe))
            CHECK(seen.insert(apply_move(alpha, m).key()).second);
    }
}

// Minimality oracle: for an add move with difference element e there is no
// strong-hierarchy model strictly between alpha and the neighbor that also
// contains e; symmetrically for removals (no strictly larger SH model below
// alpha that already excludes e).
TEST_CASE("neighbors are minimal for their difference element (exhaustive, |A| <= 4)") {
    const std::vector<int> universe{1, 2, 3, 4};
    const auto all = testsupport::enumerate_sh_models(4);
    for (const ModelAlpha& alpha : all) {
        for (const Move& m : neighborhood(alpha, universe)) {
            const ModelAlpha next = apply_move(alpha, m);
            const bool adding =
                m.kind == MoveKind::AddMain || m.kind == MoveKind::AddInteraction;
            auto contains_diff = [&](const ModelAlpha& c) {
                if (m.kind == MoveKind::AddMain || m.kind == MoveKind::RemoveMain)
                    return c.has_main(m.j);
                return c.has_interaction(m.j, m.k);
            };
            for (const ModelAlpha& mid : all) {
                if (mid == alpha || mid == next) continue;
                if (adding) {
                    if (alpha.subset_of(mid) && mid.subset_of(next) && contains_diff(mid))
                        FAIL_CHECK("non-minimal add neighbor");
                } else {
                    if (next.subset_of(mid) && mid.subset_of(alpha) && !contains_diff(mid))
                        FAIL_CHECK("non-minimal remove neighbor");
                }
            }
        }
    }
}

TEST_CASE("remove/add involution") {
    ModelAlpha a({1, 2, 3}, {{1, 2}});

    // interaction toggles restore the model exactly
    ModelAlpha b = apply_move(a, Move::remove_interaction(1, 2));
    CHECK(apply_move(b, Move::add_interaction(1, 2)) == a);

    // main toggles restore the model only when the main had no interactions
    ModelAlpha c = apply_move(a, Move::remove_main(3));
    CHECK(apply_move(c, Move::add_main(3)) == a);
    ModelAlpha d = apply_move(a, Move::remove_main(1));
    CHECK(apply_move(d, Move::add_main(1)) != a);
}

TEST_CASE("size cap excludes growing moves") {
    ModelAlpha a({1, 2}, {});
    std::vector<Move> moves = neighborhood(a, {1, 2, 3, 4}, 3);
    for (const Move& m : moves) CHECK(apply_move(a, m).size() <= 3);
    // add_interaction(3,4) would need 3 new elements; add_main fits exactly
    bool has_add_main_3 = false, has_add_inter_34 = false;
    for (const Move& m : moves) {
        if (m == Move::add_main(3)) has_add_main_3 = true;
        if (m == Move::add_interaction(3, 4)) has_add_inter_34 = true;
    }
    CHECK(has_add_main_3);
    CHECK_FALSE(has_add_inter_34);
}

TEST_CASE("there are 113 strong-hierarchy models over four variables") {
    CHECK(testsupport::enumerate_sh_models(4).size() == 113);
}
