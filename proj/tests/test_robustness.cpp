#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "support.hpp"
#include "veritas/kernels.hpp"
#include "veritas/mock_backends.hpp"
#include "veritas/robustness.hpp"

using namespace veritas;

namespace {

double linf(const ImageTensor& a, const ImageTensor& b) {
  return vt::max_abs_diff({a.data().begin(), a.data().end()}, {b.data().begin(), b.data().end()});
}

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

double loss_at(const Classifier& m, const ImageTensor& x, ClassLabel y) { return cross_entropy(m.classify(x).logits, y); }

const MockLinearClassifier& model() {
  static const MockLinearClassifier m = MockLinearClassifier::seeded(21);
  return m;
}

}  // namespace

TEST_CASE("attack config validation and names") {
  CHECK(vt::error_code([] { AttackConfig{-0.1}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(vt::error_code([] { AttackConfig{0.1, 0.0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(vt::error_code([] { AttackConfig{0.1, 0.01, 0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(vt::error_code([] { AttackConfig{0.1, 0.01, 1, 0}.validate(); }) == ErrorCode::InvalidArgument);
  for (AttackKind k : {AttackKind::Fgsm, AttackKind::Pgd, AttackKind::Wavelet, AttackKind::AutoAttack})
    CHECK(parse_attack_kind(to_string(k)) == k);
  CHECK(vt::error_code([] { parse_attack_kind("cw"); }) == ErrorCode::InvalidArgument);
}

ImageTensor interior_image(vt::Rng& rng, std::size_t n) {
  return ImageTensor(n, n, 3, vt::uniform_vector(rng, n * n * 3, 0.2, 0.8));
}

TEST_CASE("project linf") {
  vt::Rng rng(60);
  const ImageTensor x = interior_image(rng, 4);
  const double eps = 0.05;
  std::vector<double> inside(x.data().begin(), x.data().end());
  for (double& v : inside) v += veritas::uniform(rng, -eps, eps);
  const ImageTensor in(4, 4, 3, inside);
  CHECK(project_linf(in, x, eps) == in);

  std::vector<double> far(x.data().begin(), x.data().end());
  for (double& v : far) v += 2 * eps;
  const ImageTensor p = project_linf(ImageTensor(4, 4, 3, far), x, eps);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.data()[i] == doctest::Approx(x.data()[i] + eps));
  CHECK(project_linf(p, x, eps) == p);
  CHECK(vt::error_code([&] { project_linf(ImageTensor(2, 2, 3), x, eps); }) == ErrorCode::DimMismatch);
}

TEST_CASE("fgsm: zero budget and the closed form") {
  vt::Rng rng(61);
  const ImageTensor x = vt::random_image(rng, 32, 32, 3);
  CHECK(fgsm(model(), x, ClassLabel::Fake, {0.0}).adversarial == x);

  const ImageTensor xi = interior_image(rng, 32);
  AttackConfig cfg{0.03};
  cfg.clamp_valid_range = false;
  for (ClassLabel y : {ClassLabel::Real, ClassLabel::Fake}) {
    const ImageGradient g = model().input_gradient(xi, y);
    const AttackResult r = fgsm(model(), xi, y, cfg);
    for (std::size_t i = 0; i < xi.size(); ++i) {
      // The mock gradient is dz * w, so its sign is sign(dz) sign(w).
      const double dz = g.values[i] / model().input_weights()[i];
      CHECK(r.adversarial.data()[i] == xi.data()[i] + 0.03 * sign(dz) * sign(model().input_weights()[i]));
      CHECK(std::abs(std::abs(r.adversarial.data()[i] - xi.data()[i]) - 0.03) <= 1e-15);
    }
    CHECK(r.success == (model().classify(r.adversarial).prediction != y));
  }
}

TEST_CASE("pgd: collapse to fgsm and improvement on a linear loss") {
  vt::Rng rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageTensor x = vt::random_image(rng, 32, 32, 3);
    const double eps = veritas::uniform(rng, 0.0, 0.1);
    const ClassLabel y = model().classify(x).prediction;
    AttackConfig one{eps, eps > 0 ? eps : 1.0, 1};
    if (eps == 0.0) continue;
    CHECK(pgd(model(), x, y, one).adversarial == fgsm(model(), x, y, one).adversarial);

    AttackConfig ten{eps, eps / 4, 10};
    const AttackResult r = pgd(model(), x, y, ten);
    CHECK(r.linf_distance <= eps + 1e-9);
    CHECK(linf(r.adversarial, x) <= eps + 1e-9);
    CHECK(loss_at(model(), r.adversarial, y) >= loss_at(model(), fgsm(model(), x, y, ten).adversarial, y) - 1e-12);
  }
}

TEST_CASE("wavelet planes and attack") {
  vt::Rng rng(63);
  const ImageTensor x = vt::random_image(rng, 32, 32, 3);
  CHECK(linf(wavelet_attack(model(), x, ClassLabel::Fake, {0.0}).adversarial, x) <= 1e-9);
  const auto unpooled = MockLinearClassifier::seeded(21, {32, 32}, 3, 1, 0.5, 40.0);
  for (int levels : {1, 2, 3, 5}) {
    AttackConfig cfg{0.05};
    cfg.wavelet_levels = levels;
    const AttackResult r = wavelet_attack(unpooled, x, ClassLabel::Fake, cfg);
    CHECK(linf(r.adversarial, x) <= 0.05 + 1e-9);
    CHECK(r.linf_distance > 0.0);
    // A 4x4 average pool makes the input gradient constant on 4x4 blocks, so
    // its detail coefficients vanish on levels 1 and 2.
    const AttackResult pooled = wavelet_attack(model(), x, ClassLabel::Fake, cfg);
    if (levels <= 2) {
      CHECK(pooled.adversarial == x);
    } else {
      CHECK(pooled.linf_distance > 0.0);
    }
  }
  AttackConfig too_deep{0.05};
  too_deep.wavelet_levels = 6;
  CHECK(vt::error_code([&] { wavelet_attack(model(), x, ClassLabel::Fake, too_deep); }) == ErrorCode::InvalidArgument);

  const ImageTensor odd = vt::random_image(rng, 5, 7, 3);
  const WaveletPlanes p = to_planes(odd.data(), odd.dims(), 3, true);
  CHECK(p.padded == Dims{8, 8});
  const auto back = from_planes(p);
  CHECK(std::equal(back.begin(), back.end(), odd.data().begin()));

  const auto non_dyadic = MockLinearClassifier::seeded(1, {24, 24}, 3, 4, 0.5, 40.0);
  const ImageTensor x24 = vt::random_image(rng, 24, 24, 3);
  AttackConfig nopad{0.05};
  nopad.pad_non_dyadic = false;
  CHECK(vt::error_code([&] { wavelet_attack(non_dyadic, x24, ClassLabel::Fake, nopad); }) == ErrorCode::NonDyadicDims);
  CHECK(linf(wavelet_attack(non_dyadic, x24, ClassLabel::Fake, {0.05}).adversarial, x24) <= 0.05 + 1e-9);
}

TEST_CASE("property: every attack stays in the epsilon ball and in range") {
  vt::Rng rng(64);
  for (int trial = 0; trial < 30; ++trial) {
    const ImageTensor x = vt::random_image(rng, 32, 32, 3);
    const double eps = veritas::uniform(rng, 0.0, 0.2);
    const ClassLabel y = trial % 2 ? ClassLabel::Fake : ClassLabel::Real;
    for (AttackKind k : {AttackKind::Fgsm, AttackKind::Pgd, AttackKind::Wavelet, AttackKind::AutoAttack}) {
      const AttackResult r = run_attack(k, model(), x, y, {eps, 0.01, 5});
      CHECK(linf(r.adversarial, x) <= eps + 1e-9);
      for (double v : r.adversarial.data()) CHECK((v >= 0.0 && v <= 1.0));
      CHECK(r.adversarial == run_attack(k, model(), x, y, {eps, 0.01, 5}).adversarial);
    }
  }
}

TEST_CASE("attacks need gradients") {
  struct NoGrad final : Classifier {
    BackendDescriptor descriptor() const override { return {}; }
    Dims input_dims() const override { return {4, 4}; }
    std::size_t input_channels() const override { return 3; }
    ClassifierOutput classify(const ImageTensor&, bool) const override {
      ClassifierOutput o;
      o.logits = {1.0, 0.0};
      return o;
    }
  } m;
  const ImageTensor x(4, 4, 3);
  CHECK(vt::error_code([&] { fgsm(m, x, ClassLabel::Real, {}); }) == ErrorCode::GradientsUnsupported);
  CHECK(vt::error_code([&] { pgd(m, x, ClassLabel::Real, {}); }) == ErrorCode::GradientsUnsupported);
}

TEST_CASE("autoattack: early exit, exhaustion, singleton") {
  vt::Rng rng(65);
  const ImageTensor x = vt::random_image(rng, 32, 32, 3);
  const ClassLabel y = model().classify(x).prediction;

  // A budget large enough for FGSM to flip the linear mock.
  const AttackResult first = autoattack(model(), x, y, 0.5, kDefaultAutoAttackSuite);
  REQUIRE(first.success);
  CHECK(first.attacks_run == 1);
  CHECK(first.attack == "fgsm");

  const MockConstantClassifier robust({0.0, 1.0});
  const AttackResult none = autoattack(robust, x, ClassLabel::Fake, 0.1, kDefaultAutoAttackSuite);
  CHECK_FALSE(none.success);
  CHECK(none.attacks_run == 3);

  const AttackKind only_pgd[] = {AttackKind::Pgd};
  AttackConfig base{0.02, 0.005, 7};
  CHECK(autoattack(model(), x, y, 0.02, only_pgd, base).adversarial == pgd(model(), x, y, base).adversarial);

  CHECK(vt::error_code([&] { autoattack(model(), x, y, 0.02, std::span<const AttackKind>{}); }) ==
        ErrorCode::InvalidArgument);
  const AttackKind nested[] = {AttackKind::AutoAttack};
  CHECK(vt::error_code([&] { autoattack(model(), x, y, 0.02, nested); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("robustness sweep: null attack and monotone accuracy") {
  vt::Rng rng(66);
  std::vector<LabeledImage> data;
  for (int i = 0; i < 40; ++i) {
    LabeledImage s{std::to_string(i), vt::random_image(rng, 32, 32, 3), ClassLabel::Real};
    s.label = model().classify(s.image).prediction;
    if (i % 5 == 0) s.label = s.label == ClassLabel::Real ? ClassLabel::Fake : ClassLabel::Real;
    data.push_back(std::move(s));
  }
  const std::vector<double> eps{0.0, 0.01, 0.03, 0.1};
  for (AttackKind k : {AttackKind::Fgsm, AttackKind::Pgd, AttackKind::AutoAttack}) {
    const auto rows = evaluate_robustness(model(), data, k, eps, {0.03, 0.01, 10});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].adversarial_accuracy == rows[0].clean_accuracy);
    CHECK(rows[0].clean_accuracy == doctest::Approx(0.8));
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].adversarial_accuracy <= rows[i - 1].adversarial_accuracy);
    CHECK(rows[0].samples == 40);
  }
  CHECK(vt::error_code([&] { evaluate_robustness(model(), {}, AttackKind::Fgsm, eps, {}); }) ==
        ErrorCode::EmptyDataset);

  std::ostringstream csv;
  write_robustness_csv(csv, evaluate_robustness(model(), data, AttackKind::Fgsm, std::vector{0.0}, {}));
  CHECK(csv.str().rfind("epsilon,attack,clean_acc,adv_acc,n_samples\n", 0) == 0);
}
