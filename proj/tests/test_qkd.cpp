#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "generators.hpp"

#include "cohdisc/qkd.hpp"

using namespace cohdisc;

TEST_CASE("eavesdropper information") {
  CHECK(eve_information(1.0, 1.0) == 0.0);
  CHECK(eve_information(0.0, 0.3) == 0.0);
  CHECK(eve_information(1.0, 0.5) == doctest::Approx(0.90004559152353509567).epsilon(1e-12));
  CHECK_THROWS_AS(eve_information(1.0, 1.2), std::domain_error);
  CHECK_THROWS_AS(eve_information(-1.0, 0.5), std::domain_error);

  testgen::Stream gen(31);
  for (int i = 0; i < 100; ++i) {
    const double alpha = gen.uniform(0.0, 2.0);
    const double eta = gen.uniform(0.0, 0.95);
    CHECK(eve_information(alpha, eta + 0.05) <= eve_information(alpha, eta) + 1e-15);
    CHECK(eve_information(alpha + 0.05, eta) >= eve_information(alpha, eta) - 1e-15);
  }
}

TEST_CASE("Kennedy key rate without loss") {
  const auto r = key_rate(1.0, PnrSetting{1.0, 0}, ChannelModel{1.0});
  CHECK(std::abs(r.key_rate - 0.9248431588722341249) <= 1e-9);
  CHECK(r.eve_information == 0.0);
  CHECK(r.p_inc == 0.0);
}

TEST_CASE("key rate identities") {
  testgen::Stream gen(32);
  for (int i = 0; i < 100; ++i) {
    const double alpha = gen.uniform(0.05, 2.0);
    const ChannelModel ch{gen.uniform(0.01, 1.0)};
    const ReceiverSetting s = i % 2 == 0 ? ReceiverSetting{PnrSetting{gen.uniform(0.0, 3.0), gen.integer(0, 5)}}
                                         : ReceiverSetting{HomodyneSetting{gen.uniform(0.0, 2.0)}};
    const auto r = key_rate(alpha, s, ch);
    CHECK(std::abs(r.key_rate - (1.0 - r.p_inc) * (r.bob_information - r.eve_information)) <= 1e-12);
    CHECK(r.key_rate <= 1.0);
  }
  // Vacuum carries no key.
  CHECK(key_rate(0.0, HomodyneSetting{0.0}, ChannelModel{0.5}).key_rate == doctest::Approx(0.0));
  // A huge threshold keeps nothing.
  CHECK(std::abs(key_rate(1.0, HomodyneSetting{40.0}, ChannelModel{0.5}).key_rate) < 1e-12);
}

TEST_CASE("custom eavesdropper model") {
  const EveInformationModel none = [](double, double) { return 0.0; };
  const auto r = key_rate(0.8, HomodyneSetting{0.3}, ChannelModel{0.2}, none);
  CHECK(r.eve_information == 0.0);
  CHECK(r.key_rate > 0.0);
}

TEST_CASE("optimized key rates") {
  const std::vector<double> etas{0.01, 0.1, 0.5, 0.9, 1.0};
  std::vector<KeyRatePoint> pnr, hd;
  for (double eta : etas) {
    pnr.push_back(optimize_key_rate(ChannelModel{eta}, ReceiverKind::pnr));
    hd.push_back(optimize_key_rate(ChannelModel{eta}, ReceiverKind::homodyne));
  }
  for (std::size_t i = 0; i < etas.size(); ++i) {
    CAPTURE(etas[i]);
    CHECK(pnr[i].m_opt <= 10);
    CHECK(pnr[i].key_rate <= 1.0);
    CHECK(hd[i].key_rate <= 1.0);
    CHECK(pnr[i].reported_key_rate() >= 0.0);
    if (i > 0) {
      CHECK(pnr[i].reported_key_rate() >= pnr[i - 1].reported_key_rate());
      CHECK(hd[i].reported_key_rate() >= hd[i - 1].reported_key_rate());
      CHECK(pnr[i].m_opt <= pnr[i - 1].m_opt);
    }
  }
  CHECK(pnr.back().key_rate >= 0.9248431588722341249 - 1e-6);
  CHECK(pnr[3].key_rate > hd[3].key_rate);
  CHECK(pnr[2].key_rate > hd[2].key_rate);
  // Search is deterministic.
  const auto again = optimize_key_rate(ChannelModel{0.5}, ReceiverKind::pnr);
  CHECK(again.key_rate == pnr[2].key_rate);
  CHECK(again.alpha_opt == pnr[2].alpha_opt);

  CHECK_THROWS_AS(optimize_key_rate(ChannelModel{0.0}, ReceiverKind::pnr), std::domain_error);
  KeyRateSearch bad;
  bad.alpha_max = bad.alpha_min;
  CHECK_THROWS_AS(optimize_key_rate(ChannelModel{0.5}, ReceiverKind::pnr, bad), std::invalid_argument);
}

TEST_CASE("receiver names") {
  CHECK(to_string(ReceiverKind::pnr) == "pnr");
  CHECK(to_string(ReceiverKind::homodyne) == "homodyne");
}
