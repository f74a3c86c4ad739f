#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "realitygen/error.hpp"
#include "realitygen/physics.hpp"

namespace fs = std::filesystem;
using namespace realitygen;
using physics::AttenuationParams;
using projection::Channel;

TEST(PhysicsIntensity, ScalarCases) {
  EXPECT_DOUBLE_EQ(physics::physics_intensity(1.0, 1.0, 1.0), 1.0);
  EXPECT_NEAR(physics::physics_intensity(2.0, 0.5, 0.8), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(physics::physics_intensity(0.5, 1.0, 1.0), 1.0);  // raw 2.0, clamped
  EXPECT_THROW(physics::physics_intensity(0.0, 1.0, 1.0), Error);
  EXPECT_THROW(physics::physics_intensity(-1.0, 1.0, 1.0), Error);
}

TEST(PhysicsIntensity, MonotoneAndLinearOnUnclampedRegion) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double mr = u(rng), c = u(rng);
    const double r = 1.0 + 50.0 * u(rng);
    EXPECT_GT(physics::physics_intensity(r, c, mr), physics::physics_intensity(r * 1.01, c, mr));
    EXPECT_NEAR(physics::physics_intensity(r, c, mr * 0.5),
                0.5 * physics::physics_intensity(r, c, mr), 1e-15);
    EXPECT_NEAR(physics::physics_intensity(r, c * 0.5, mr),
                0.5 * physics::physics_intensity(r, c, mr), 1e-15);
  }
}

TEST(Attenuate, BeerLambertCases) {
  const auto clear = AttenuationParams::clear();
  EXPECT_EQ(physics::attenuate(0.37, 80.0, clear), 0.37);
  const auto rain = AttenuationParams::make(physics::WeatherKind::Rain, 0.01);
  EXPECT_NEAR(physics::attenuate(1.0, 50.0, rain), 0.36787944117144233, 1e-15);
  EXPECT_EQ(physics::attenuate(0.0, 12.0, rain), 0.0);
}

TEST(Attenuate, MultiplicativeInAlpha) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a1 = 0.02 * u(rng), a2 = 0.02 * u(rng);
    const double intensity = u(rng), range = 100.0 * u(rng) + 0.1;
    const auto p1 = AttenuationParams::make(physics::WeatherKind::Snow, a1);
    const auto p2 = AttenuationParams::make(physics::WeatherKind::Snow, a2);
    const auto p12 = AttenuationParams::make(physics::WeatherKind::Snow, a1 + a2);
    EXPECT_NEAR(physics::attenuate(intensity, range, p12),
                physics::attenuate(physics::attenuate(intensity, range, p1), range, p2), 1e-9);
  }
}

TEST(AttenuationParams, Invariants) {
  EXPECT_THROW(AttenuationParams::make(physics::WeatherKind::Clear, 0.01), Error);
  EXPECT_THROW(AttenuationParams::make(physics::WeatherKind::Rain, -0.01), Error);
  EXPECT_NO_THROW(AttenuationParams::make(physics::WeatherKind::Clear, 0.0));
}

namespace {

projection::RangeImage radial_fixture() {
  // One occupied pixel per column, range increasing with column index,
  // reflectance 1 and cos(theta) 1 everywhere.
  projection::SensorProfile prof;
  prof.channels = 4;
  prof.width = 64;
  prof.max_range = 100.0;
  projection::RangeImage image(prof);
  for (int col = 0; col < prof.width; ++col) {
    const double range = 0.25 + 1.5 * col;
    image.at(Channel::Range, 1, col) = float(range / prof.max_range);
    image.at(Channel::Incidence, 1, col) = 1.f;
    image.at(Channel::Reflectance, 1, col) = 1.f;
    image.at(Channel::Intensity, 1, col) = 0.77f;
    image.at(Channel::Mask, 1, col) = 1.f;
    image.pixel_to_point()[std::size_t(prof.width + col)] = col;
  }
  return image;
}

}  // namespace

TEST(ReferenceImage, RadialFixtureIsMinOfOneAndInverseRange) {
  const auto image = radial_fixture();
  const auto ref = physics::reference_image(image, AttenuationParams::clear());
  float previous = 2.f;
  for (int col = 0; col < image.width(); ++col) {
    const double range = double(image.at(Channel::Range, 1, col)) * 100.0;
    const float v = ref.at(Channel::Intensity, 1, col);
    EXPECT_NEAR(v, std::min(1.0, 1.0 / range), 1e-6);
    EXPECT_LE(v, previous);
    previous = v;
    EXPECT_EQ(ref.at(Channel::Intensity, 0, col), 0.f);  // masked-out row
  }
}

TEST(ReferenceImage, ClearEqualsPhysicsIntensityAndWeatherAttenuates) {
  const auto image = radial_fixture();
  const auto clear = physics::reference_image(image, AttenuationParams::clear());
  const auto snow = AttenuationParams::make(physics::WeatherKind::Snow, 0.005);
  const auto weathered = physics::reference_image(image, snow);
  for (int col = 0; col < image.width(); ++col) {
    const double range = double(image.at(Channel::Range, 1, col)) * 100.0;
    EXPECT_EQ(clear.at(Channel::Intensity, 1, col), float(physics::physics_intensity(range, 1.0, 1.0)));
    EXPECT_EQ(weathered.at(Channel::Intensity, 1, col),
              float(physics::attenuate(physics::physics_intensity(range, 1.0, 1.0), range, snow)));
  }
}

TEST(ReferenceImage, MissingIncidenceIsReported) {
  auto image = radial_fixture();
  image.at(Channel::Incidence, 1, 5) = 0.f;
  EXPECT_THROW(physics::reference_image(image, AttenuationParams::clear()), Error);
}

TEST(MaterialTable, DefaultsAndLoading) {
  const auto table = physics::MaterialTable::semantic_kitti_defaults();
  EXPECT_EQ(table.lookup(40), 0.15);
  EXPECT_EQ(table.lookup(10), 0.45);
  EXPECT_EQ(table.lookup(70), 0.25);
  EXPECT_EQ(table.lookup(81), 0.85);
  EXPECT_EQ(table.lookup(12345), 0.3);

  const auto dir = fixture::temp_dir("materials");
  {
    std::ofstream out(dir / "m.cfg");
    out << "# comment\ndefault = 0.5\n40 = 0.2\n10 = 0.9\n";
  }
  const auto loaded = physics::MaterialTable::load(dir / "m.cfg");
  EXPECT_EQ(loaded.lookup(40), 0.2);
  EXPECT_EQ(loaded.lookup(10), 0.9);
  EXPECT_EQ(loaded.lookup(7), 0.5);
  {
    std::ofstream out(dir / "bad.cfg");
    out << "40 = 1.5\n";
  }
  EXPECT_THROW(physics::MaterialTable::load(dir / "bad.cfg"), Error);
  {
    std::ofstream out(dir / "bad2.cfg");
    out << "road = 0.1\n";
  }
  EXPECT_THROW(physics::MaterialTable::load(dir / "bad2.cfg"), Error);
  fs::remove_all(dir);
}

TEST(MaterialTable, ShippedDefaultsFileMatchesBuiltIn) {
  const auto shipped = physics::MaterialTable::load(REALITYGEN_DATA_DIR "/materials_semantickitti.cfg");
  const auto builtin = physics::MaterialTable::semantic_kitti_defaults();
  EXPECT_EQ(shipped.entries(), builtin.entries());
  EXPECT_EQ(shipped.default_reflectance(), builtin.default_reflectance());
}
