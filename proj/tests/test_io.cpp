#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "sek/io.hpp"

using namespace sek;

namespace {

std::string data(const std::string& name) { return std::string(SEK_DATA_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(StateJson, RoundTrip) {
  const MultipartiteState s = random_state({2, 3}, 4, 11);
  const MultipartiteState back = io::state_from_json(io::Json::parse(io::dump(io::state_to_json(s))));
  EXPECT_EQ(back.labels(), s.labels());
  EXPECT_EQ(back.dims(), s.dims());
  EXPECT_TRUE(back.op().isApprox(s.op(), 1e-15));
}

TEST(PovmJson, RoundTrip) {
  const Povm p = random_povm(3, 4, 12);
  const Povm back = io::povm_from_json(io::Json::parse(io::dump(io::povm_to_json(p))), "p");
  ASSERT_EQ(back.size(), p.size());
  EXPECT_EQ(back.outcome_labels(), p.outcome_labels());
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_TRUE(back.element(i).isApprox(p.element(i), 1e-15));
}

TEST(DataFiles, Load) {
  const MultipartiteState phi = io::read_state_file(data("phi_plus.json"));
  EXPECT_EQ(phi.labels(), (Labels{"A", "B"}));
  EXPECT_NEAR(phi.trace(), 1.0, 1e-15);
  const Povm x = io::read_povm_file(data("bb84_x.json"));
  const Povm z = io::read_povm_file(data("bb84_z.json"));
  EXPECT_EQ(x.name(), "bb84_x.json");
  EXPECT_NEAR(overlap(x, z).c, 0.5, 1e-15);
  const Povm f = io::read_povm_file(data("qutrit_fourier.json"));
  const Povm c = io::read_povm_file(data("qutrit_computational.json"));
  EXPECT_NEAR(overlap(f, c).q, std::log2(3.0), 1e-12);
}

TEST(StateJson, RejectsMalformedInput) {
  const auto parse = [](const std::string& text) {
    return io::state_from_json(io::Json::parse(text));
  };
  EXPECT_THROW(parse("[]"), ArgumentError);
  EXPECT_THROW(parse(R"({"labels":["A"],"dims":[2]})"), ArgumentError);
  EXPECT_THROW(parse(R"({"labels":["A"],"dims":[2],"matrix":[[[1,0],[0,0]]]})"), ArgumentError);
  EXPECT_THROW(parse(R"({"labels":["A"],"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0],[0]]]})"),
               ArgumentError);
  EXPECT_THROW(parse(R"({"labels":"A","dims":[2],"matrix":[]})"), ArgumentError);
  EXPECT_THROW(parse(R"({"labels":["A"],"dims":[0],"matrix":[]})"), ArgumentError);
  // not positive semidefinite
  EXPECT_THROW(parse(R"({"labels":["A"],"dims":[2],"matrix":[[[1.5,0],[0,0]],[[0,0],[-0.5,0]]]})"),
               ArgumentError);
  // not Hermitian
  EXPECT_THROW(parse(R"({"labels":["A"],"dims":[2],"matrix":[[[0.5,0],[0.3,0]],[[0,0],[0.5,0]]]})"),
               ArgumentError);
}

TEST(PovmJson, RejectsMalformedInput) {
  const auto parse = [](const std::string& text) {
    return io::povm_from_json(io::Json::parse(text));
  };
  EXPECT_THROW(parse(R"({"dim":2,"outcomes":["0"]})"), ArgumentError);
  // elements do not sum to the identity
  EXPECT_THROW(parse(R"({"dim":1,"outcomes":["0","1"],"elements":[[[[0.5,0]]],[[[0.4,0]]]]})"),
               ArgumentError);
  EXPECT_THROW(parse(R"({"dim":1,"outcomes":["0"],"elements":[[[[1,0]]],[[[0,0]]]]})"),
               ArgumentError);
}

TEST(Files, MissingAndInvalid) {
  EXPECT_THROW(io::read_state_file("/nonexistent/state.json"), ArgumentError);
  EXPECT_THROW(io::read_state_file(write_temp("sek_bad.json", "{not json")), ArgumentError);
}

TEST(Transcript, RoundTripAndBitStrings) {
  EXPECT_EQ(io::bits_to_string({1, 0, 1}), "101");
  EXPECT_EQ(io::bits_from_string("0110"), (std::vector<std::uint8_t>{0, 1, 1, 0}));
  EXPECT_THROW(io::bits_from_string("01x"), ArgumentError);
  const qkd::SimTranscript t = qkd::simulate_bb84(300, 0.1, 0.3, 8);
  const io::Json j = io::transcript_to_json(t);
  EXPECT_EQ(j["form"], "asymptotic-form");
  const qkd::SimTranscript back = io::transcript_from_json(j);
  EXPECT_EQ(io::transcript_to_json(back).dump(), j.dump());
  io::Json broken = j;
  broken["raw_bob"] = "01";
  EXPECT_THROW(io::transcript_from_json(broken), ArgumentError);
  broken.erase("raw_bob");
  EXPECT_THROW(io::transcript_from_json(broken), ArgumentError);
}
