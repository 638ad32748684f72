#include "doctest.h"
#include "oddvar/errors.hpp"
#include "oddvar/grid.hpp"

using namespace oddvar;

TEST_CASE("grid steps, pad and points") {
  TimeGrid g(1.0, 1024, {1.0 / 16, 1.0 / 64});
  CHECK(g.step() == doctest::Approx(1.0 / 1024));
  CHECK(g.steps_for(1.0 / 16) == 64);
  CHECK(g.steps_for(1.0 / 64) == 16);
  CHECK(g.pad_steps() == 64);
  CHECK(g.points() == 1024 + 64 + 1);
  CHECK(g.index_of(0.5) == 512);
  CHECK(g.index_of(1.0) == 1024);
}

TEST_CASE("dyadic ladder is absolute") {
  const int ks[] = {4, 5, 6};
  auto g = TimeGrid::dyadic(2.0, 2048, ks);
  REQUIRE(g.ladder().size() == 3);
  CHECK(g.ladder()[0] == 1.0 / 16);
  CHECK(g.ladder()[2] == 1.0 / 64);
}

TEST_CASE("grid rejects bad ladders") {
  CHECK_THROWS_AS(TimeGrid(1.0, 1000, {0.1, 0.0123}), GridError);
  CHECK_THROWS_AS(TimeGrid(1.0, 1024, {1.0 / 64, 1.0 / 16}), GridError);
  CHECK_THROWS_AS(TimeGrid(1.0, 1024, {0.5}), GridError);
  CHECK_THROWS_AS(TimeGrid(1.0, 1024, {-0.25}), GridError);
  CHECK_THROWS_AS(TimeGrid(0.0, 1024, {0.25}), GridError);
  CHECK_THROWS_AS(TimeGrid(1.0, 1, {0.25}), GridError);
}

TEST_CASE("misaligned epsilon is named in the message") {
  try {
    TimeGrid(1.0, 1000, {0.1, 0.0123});
    FAIL("no throw");
  } catch (const GridError& e) {
    CHECK(std::string(e.what()).find("0.0123") != std::string::npos);
  }
}

TEST_CASE("grid lookups outside the grid throw") {
  TimeGrid g(1.0, 1024, {1.0 / 16});
  CHECK_THROWS_AS(g.steps_for(1.0 / 8), GridError);
  CHECK_THROWS_AS(g.index_of(0.5 + 1e-4), GridError);
  CHECK_THROWS_AS(g.index_of(1.5), GridError);
}
