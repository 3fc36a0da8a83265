#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sostime/prng.hpp"
#include "sostime/sync.hpp"

using namespace sostime;

TEST_CASE("fault-tolerant midpoint on handwritten vectors")
{
    CHECK(ft_midpoint({0}, 0) == 0);
    CHECK(ft_midpoint({1, 3}, 0) == 2);
    CHECK(ft_midpoint({1, 4}, 0) == 2);    // truncates toward zero
    CHECK(ft_midpoint({-1, -4}, 0) == -2); // symmetric for negatives
    CHECK(ft_midpoint({5, 100, 0}, 1) == 5);
    CHECK(ft_midpoint({-50, 2, 4, 6, 900}, 1) == 4);
    CHECK_THROWS_AS(ft_midpoint({1, 2}, 1), std::invalid_argument);
    CHECK_THROWS_AS(ft_midpoint({}, 0), std::invalid_argument);
    CHECK_THROWS_AS(ft_midpoint({1}, -1), std::invalid_argument);
}

TEST_CASE("midpoint is permutation invariant")
{
    RngStream st(70);
    for (int rep = 0; rep < 500; ++rep) {
        int n = static_cast<int>(st.next_in(3, 9));
        int f = static_cast<int>(st.next_in(0, (n - 1) / 2));
        std::vector<std::int64_t> v;
        for (int i = 0; i < n; ++i)
            v.push_back(st.next_in(-1'000'000, 1'000'000));
        std::int64_t expect = ft_midpoint(v, f);
        for (int shuffle = 0; shuffle < 8; ++shuffle) {
            for (std::size_t i = v.size(); i > 1; --i)
                std::swap(v[i - 1], v[st.next_below(i)]);
            CHECK(ft_midpoint(v, f) == expect);
        }
    }
}

// The property the whole sync design rests on: with at most f arbitrary
// values among n >= 2f+1 readings, the midpoint stays inside the range
// spanned by the correct readings. An adversary controlling message
// content therefore cannot drag a correct clock outside the ensemble.
TEST_CASE("adversarial readings cannot pull the midpoint outside the correct range")
{
    RngStream st(71);
    int vectors = 0;
    for (int rep = 0; rep < 12'000; ++rep) {
        int f = static_cast<int>(st.next_in(0, 3));
        int n = static_cast<int>(st.next_in(2 * f + 1, 2 * f + 7));
        int faulty = static_cast<int>(st.next_in(0, f));

        std::vector<std::int64_t> correct;
        for (int i = 0; i < n - faulty; ++i)
            correct.push_back(st.next_in(-50'000, 50'000));
        std::int64_t lo = *std::min_element(correct.begin(), correct.end());
        std::int64_t hi = *std::max_element(correct.begin(), correct.end());

        std::vector<std::int64_t> all = correct;
        for (int i = 0; i < faulty; ++i) {
            // mix blatant and subtle adversaries
            switch (st.next_below(4)) {
            case 0: all.push_back(st.next_in(1'000'000'000, 4'000'000'000)); break;
            case 1: all.push_back(st.next_in(-4'000'000'000, -1'000'000'000)); break;
            case 2: all.push_back(hi + st.next_in(0, 3)); break;
            default: all.push_back(st.next_in(lo, hi)); break;
            }
        }
        for (std::size_t i = all.size(); i > 1; --i)
            std::swap(all[i - 1], all[st.next_below(i)]);

        std::int64_t m = ft_midpoint(all, f);
        ++vectors;
        REQUIRE(m >= lo);
        REQUIRE(m <= hi);
    }
    CHECK(vectors >= 10'000);
}

TEST_CASE("midpoint contracts the spread of correct readings")
{
    // Everyone correct: the result is the exact midpoint, so two ensembles
    // whose per-value difference is bounded by e produce results within e.
    RngStream st(72);
    for (int rep = 0; rep < 2'000; ++rep) {
        int n = static_cast<int>(st.next_in(2, 8));
        std::int64_t e = st.next_in(0, 1'000);
        std::vector<std::int64_t> a, b;
        for (int i = 0; i < n; ++i) {
            std::int64_t v = st.next_in(-100'000, 100'000);
            a.push_back(v);
            b.push_back(v + st.next_in(-e, e));
        }
        std::int64_t da = ft_midpoint(a, 0);
        std::int64_t db = ft_midpoint(b, 0);
        CHECK(std::abs(da - db) <= e + 1); // +1 for truncation
    }
}

TEST_CASE("time server availability windows")
{
    TimeServer always;
    CHECK(always.up_at(0));
    CHECK(always.up_at(1'000'000'000'000));

    TimeServer gaps;
    gaps.availability = {{0, 100}, {200, 300}};
    CHECK(gaps.up_at(0));
    CHECK(gaps.up_at(99));
    CHECK_FALSE(gaps.up_at(100)); // until is exclusive
    CHECK_FALSE(gaps.up_at(150));
    CHECK(gaps.up_at(200));
    CHECK_FALSE(gaps.up_at(300));
}

TEST_CASE("sync config collect window defaults to half the round")
{
    SyncConfig c;
    c.resync_interval_ns = 100;
    CHECK(c.effective_collect_ns() == 50);
    c.collect_ns = 30;
    CHECK(c.effective_collect_ns() == 30);
}
