#include <gtest/gtest.h>

#include "pdlc/config.hpp"
#include "pdlc/errors.hpp"

using namespace pdlc;

namespace {

std::string error_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, EmptySectionKeepsDefaults) {
    const auto c = parse_config("[sa]\n");
    EXPECT_EQ(c.sa.max_iter, 2000);
    EXPECT_EQ(c.sa.step_scale, 5.0);
    EXPECT_EQ(c.sa.epsilon, 0.05);
    EXPECT_TRUE(c.has("sa"));
    EXPECT_FALSE(c.has("queue"));
    EXPECT_EQ(parse_config(""), RunConfig{});
}

TEST(Config, ParsesValuesListsAndComments) {
    const auto c = parse_config(R"(
# fleet
[queue]
n = 20        # rooms
m = 7
delta = 30
m_grid = 1, 2, 3
[wind]
p_r = 12
cv = 0.25
correlated = true
[market]
k_t = 2
k_b = 3, 5
k_b_prob = 0.25, 0.75
)");
    EXPECT_EQ(c.queue.n_appliances, 20);
    EXPECT_EQ(c.queue.m_servers, 7);
    EXPECT_EQ(c.queue.delta, 30.0);
    EXPECT_EQ(c.m_grid, (std::vector<int>{1, 2, 3}));
    EXPECT_DOUBLE_EQ(c.wind.stddev(), 3.0);
    ASSERT_EQ(c.market.balancing.size(), 2u);
    EXPECT_EQ(c.market.balancing[1].price, 5.0);
    EXPECT_EQ(c.market.balancing[1].prob, 0.75);
}

TEST(Config, BalancingPairing) {
    auto c = parse_config("[market]\nk_b = 2, 4\n");
    EXPECT_EQ(c.market.balancing[0].prob, 0.5);
    c = parse_config("[market]\nk_t = 2\nk_r = 0.1\n");
    EXPECT_EQ(c.market.balancing, MarketSpec::default_balancing(2.0));
    EXPECT_NE(error_of("[market]\nk_b = 2, 4\nk_b_prob = 1\n"), "");
}

TEST(Config, RejectsReservationPriceAboveDayAhead) {
    const auto e = error_of("[market]\nk_t = 1\nk_r = 1.5\n");
    EXPECT_NE(e.find("k_r < k_t"), std::string::npos) << e;
    EXPECT_EQ(e.rfind("line 1:", 0), 0u) << e;
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_of("[queue]\nn = 4\nbogus = 1\n").rfind("line 3:", 0), 0u);
    EXPECT_EQ(error_of("\n[nope]\n").rfind("line 2:", 0), 0u);
    EXPECT_EQ(error_of("[queue]\nm = two\n").rfind("line 2:", 0), 0u);
    EXPECT_EQ(error_of("[queue]\n[queue]\n").rfind("line 2:", 0), 0u);
    EXPECT_EQ(error_of("[queue]\njust words\n").rfind("line 2:", 0), 0u);
    EXPECT_NE(error_of("[queue]\nn = 2\nm = 5\n"), "");
    EXPECT_NE(error_of("[queue]\nn = 4\nm_grid = 0, 1\n"), "");
    EXPECT_NE(error_of("[sim]\nmodel = fluid\n"), "");
}

TEST(Config, SerializeRoundTrip) {
    const auto c = parse_config(R"(
[run]
seed = 77
[thermal]
rooms = 3
t_set = 23, 24, 25
band = 0.5
w_max = 0.1
[queue]
n = 9
m = 4
lambda = 0.0021
delta_grid = 10, 20.5
[welfare]
g_quad = 3.5
h_price = 0.2
[wind]
p_r = 7.25
cv = 0.1
correlated = true
scheme = gauss-hermite
[market]
gamma = 0.9
k_b = 1.2, 3.4
k_b_prob = 0.3, 0.7
[sa]
max_iter = 123
step_scale_pr = 0.3
[sim]
model = chain
lower_edge = hysteresis
protocol = full-info
[sweep]
cv_grid = 0.1, 0.3
)");
    const auto text = serialize_config(c);
    const auto back = parse_config(text);
    EXPECT_EQ(back, c) << text;
    EXPECT_EQ(serialize_config(back), text);
}
