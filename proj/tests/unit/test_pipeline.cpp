#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "realitygen/checksum.hpp"
#include "realitygen/error.hpp"
#include "realitygen/pipeline.hpp"

namespace fs = std::filesystem;
using namespace realitygen;
using pipeline::JobConfig;
using pipeline::Variant;

namespace {

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fixture::temp_dir("pipeline");
    source_ = root_ / "kitti";
    frames_ = fixture::write_kitti_tree(source_, {"00", "03"}, 3, 42, 8);
    std::sort(frames_.begin(), frames_.end());
  }
  void TearDown() override { fs::remove_all(root_); }

  JobConfig config(const std::string& out, std::vector<Variant> variants, unsigned workers = 1) {
    std::ostringstream text;
    text << "[job]\ndataset = semantickitti\nsource_root = kitti\noutput_root = " << out
         << "\nseed = 1234\nworkers = " << workers << "\nvariants = ";
    for (std::size_t i = 0; i < variants.size(); ++i) {
      text << (i ? ", " : "") << pipeline::to_string(variants[i]);
    }
    text << "\n[snow]\nrate_mm_h = 8\n[rain]\nrate_mm_h = 20\n";
    return JobConfig::parse(text.str(), root_);
  }

  static std::vector<std::byte> bytes(const fs::path& p) { return io::read_file(p); }

  fs::path root_, source_;
  std::vector<std::string> frames_;
};

}  // namespace

TEST_F(PipelineTest, PreservesRelativePathsAndWritesManifest) {
  const auto cfg = config("out", {Variant::Snow});
  const auto manifest = pipeline::run_job(cfg);
  ASSERT_EQ(manifest.records.size(), frames_.size());
  EXPECT_EQ(manifest.failed(), 0u);
  EXPECT_EQ(manifest.frame_count, frames_.size());
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& rec = manifest.records[i];
    EXPECT_EQ(rec.relative_path, frames_[i]);
    EXPECT_EQ(rec.variant, "snow");
    const fs::path out = root_ / "out/snow" / frames_[i];
    ASSERT_TRUE(fs::exists(out)) << out;
    EXPECT_EQ(fs::file_size(out), rec.output_points * 16);
    EXPECT_EQ(rec.sha256, sha256_hex(bytes(out)));
    EXPECT_EQ(rec.input_points, fs::file_size(source_ / frames_[i]) / 16);
    EXPECT_EQ(rec.summary.total(), rec.input_points);
    EXPECT_EQ(rec.output_points, rec.summary.kept + rec.summary.relocated);
    EXPECT_EQ(rec.seed, pipeline::frame_seed(1234, frames_[i]));
  }
  EXPECT_EQ(pipeline::Manifest::read(root_ / "out" / pipeline::kManifestName), manifest);
}

TEST_F(PipelineTest, RerunAndWorkerCountAreByteIdentical) {
  pipeline::run_job(config("a", {Variant::Snow, Variant::Rain}, 1));
  pipeline::run_job(config("a2", {Variant::Snow, Variant::Rain}, 1));
  pipeline::run_job(config("b", {Variant::Snow, Variant::Rain}, 4));
  for (const char* variant : {"snow", "rain"}) {
    for (const auto& f : frames_) {
      const auto ref = bytes(root_ / "a" / variant / f);
      EXPECT_EQ(bytes(root_ / "a2" / variant / f), ref);
      EXPECT_EQ(bytes(root_ / "b" / variant / f), ref);
    }
  }
  EXPECT_EQ(bytes(root_ / "a" / pipeline::kManifestName), bytes(root_ / "b" / pipeline::kManifestName));
}

TEST_F(PipelineTest, SnowAndRainOutputsDiffer) {
  const auto manifest = pipeline::run_job(config("out", {Variant::Snow, Variant::Rain}, 3));
  EXPECT_EQ(manifest.records.size(), 2 * frames_.size());
  for (const auto& f : frames_) {
    EXPECT_NE(bytes(root_ / "out/snow" / f), bytes(root_ / "out/rain" / f));
  }
}

TEST_F(PipelineTest, IntensityAdaptedKeepsGeometry) {
  const auto manifest = pipeline::run_job(config("out", {Variant::IntensityAdapted}));
  for (const auto& rec : manifest.records) {
    EXPECT_EQ(rec.method, "physics-reference");
    EXPECT_EQ(rec.output_points, rec.input_points);
    const auto src = io::read_sweep(source_ / rec.relative_path, FormatTag::Kitti4);
    const auto out = io::read_sweep(root_ / "out/intensity_adapted" / rec.relative_path, FormatTag::Kitti4);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      EXPECT_EQ(out.points[i].x, src.points[i].x);
      EXPECT_EQ(out.points[i].z, src.points[i].z);
      EXPECT_GE(out.points[i].intensity, 0.f);
      EXPECT_LE(out.points[i].intensity, 1.f);
      changed += out.points[i].intensity != src.points[i].intensity;
    }
    EXPECT_GT(changed, src.size() / 2);
  }
}

TEST_F(PipelineTest, ValidateCorrespondence) {
  pipeline::run_job(config("out", {Variant::Snow, Variant::Rain}));
  const auto layout = io::enumerate_frames(source_, io::DatasetKind::SemanticKitti);
  auto report = pipeline::validate_correspondence(layout, root_ / "out/snow");
  EXPECT_TRUE(report.clean()) << report.to_text();
  EXPECT_EQ(report.checked, frames_.size());
  EXPECT_GE(report.point_delta, 0);

  fs::remove(root_ / "out/rain" / frames_[1]);
  report = pipeline::validate_correspondence(layout, root_ / "out/rain");
  EXPECT_EQ(report.missing, std::vector<std::string>{frames_[1]});
  EXPECT_TRUE(report.format_violations.empty());

  fs::resize_file(root_ / "out/snow" / frames_[2], 17);
  std::ofstream(root_ / "out/snow/stray.bin") << "x";
  report = pipeline::validate_correspondence(layout, root_ / "out/snow");
  ASSERT_EQ(report.format_violations.size(), 1u);
  EXPECT_EQ(report.format_violations[0].relative_path, frames_[2]);
  EXPECT_EQ(report.extra, std::vector<std::string>{"stray.bin"});
  EXPECT_FALSE(report.clean());
}

TEST_F(PipelineTest, ValidateCatchesTamperingAgainstManifest) {
  pipeline::run_job(config("out", {Variant::Rain}));
  const auto layout = io::enumerate_frames(source_, io::DatasetKind::SemanticKitti);
  auto cloud = io::read_sweep(root_ / "out/rain" / frames_[0], FormatTag::Kitti4);
  cloud.points[0].intensity = 0.123f;
  io::write_sweep(cloud, root_ / "out/rain" / frames_[0]);
  const auto report = pipeline::validate_correspondence(layout, root_ / "out/rain");
  ASSERT_EQ(report.manifest_mismatches.size(), 1u);
  EXPECT_EQ(report.manifest_mismatches[0].relative_path, frames_[0]);

  // A derived frame can never carry more points than its source.
  auto grown = io::read_sweep(source_ / frames_[1], FormatTag::Kitti4);
  grown.points.push_back(grown.points[0]);
  io::write_sweep(grown, root_ / "out/rain" / frames_[1]);
  EXPECT_EQ(pipeline::validate_correspondence(layout, root_ / "out/rain").point_count_violations.size(), 1u);
}

TEST_F(PipelineTest, FailedFrameIsRecordedAndJobContinues) {
  fs::resize_file(source_ / frames_[0], 33);
  const auto manifest = pipeline::run_job(config("out", {Variant::Snow}));
  EXPECT_EQ(manifest.failed(), 1u);
  EXPECT_FALSE(manifest.records[0].ok());
  EXPECT_NE(manifest.records[0].error.find("TruncatedFile"), std::string::npos);
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    EXPECT_TRUE(manifest.records[i].ok());
    EXPECT_TRUE(fs::exists(root_ / "out/snow" / frames_[i]));
  }
  // No source file was modified by the run.
  EXPECT_EQ(fs::file_size(source_ / frames_[0]), 33u);
}

TEST_F(PipelineTest, ExternalIntensitySplice) {
  const auto cloud = io::read_sweep(source_ / frames_[0], FormatTag::Kitti4);
  auto image = projection::project(cloud, projection::SensorProfile::hdl64());
  for (float& v : image.plane(projection::Channel::Intensity)) v = v > 0.f ? 0.25f : 0.f;
  projection::write_dump(image, root_ / "learned" / (frames_[0] + ".rimg"));

  std::ofstream(root_ / "job.cfg") << "[job]\nsource_root = kitti\noutput_root = out\n"
                                      "variants = intensity_adapted\nintensity_images = learned\n";
  auto cfg = JobConfig::load(root_ / "job.cfg");
  const auto manifest = pipeline::run_job(cfg);
  EXPECT_EQ(manifest.records[0].method, "external-intensity");
  EXPECT_TRUE(manifest.records[0].ok());
  EXPECT_FALSE(manifest.records[1].ok());  // no learned image for this frame
  const auto out = io::read_sweep(root_ / "out/intensity_adapted" / frames_[0], FormatTag::Kitti4);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto px = projection::pixel_for(cloud.points[i], image.profile());
    if (px && image.point_index(px->row, px->col) == std::int32_t(i)) {
      EXPECT_EQ(out.points[i].intensity, 0.25f);
    }
  }
}

TEST(FrameSeed, StableAndPathDependent) {
  const auto a = pipeline::frame_seed(7, "sequences/00/velodyne/000000.bin");
  EXPECT_EQ(a, pipeline::frame_seed(7, "sequences/00/velodyne/000000.bin"));
  EXPECT_NE(a, pipeline::frame_seed(7, "sequences/00/velodyne/000001.bin"));
  EXPECT_NE(a, pipeline::frame_seed(8, "sequences/00/velodyne/000000.bin"));
}

TEST(JobConfig, ParsingAndValidation) {
  const auto base = fixture::temp_dir("jobcfg");
  const std::string good =
      "[job]\ndataset = nuscenes\nsource_root = src\noutput_root = /tmp/out\n"
      "variants = rain, snow, rain\nseed = 5\nworkers = 3\n"
      "[profile]\nmax_range = 70\n[rain]\nrate_mm_h = 3\nalpha_override = 0.002\n";
  const auto cfg = JobConfig::parse(good, base);
  EXPECT_EQ(cfg.dataset, io::DatasetKind::Nuscenes);
  EXPECT_EQ(cfg.source_root, base / "src");
  EXPECT_EQ(cfg.output_root, fs::path("/tmp/out"));
  EXPECT_EQ(cfg.variants, (std::vector<Variant>{Variant::Rain, Variant::Snow}));
  EXPECT_EQ(cfg.profile.channels, 32);
  EXPECT_EQ(cfg.profile.max_range, 70.0);
  EXPECT_EQ(cfg.weather.at(Variant::Rain).rate_mm_h, 3.0);
  EXPECT_EQ(cfg.weather.at(Variant::Rain).alpha_override, std::optional<double>(0.002));
  EXPECT_EQ(cfg.weather.at(Variant::Snow).weather, weather::Precipitation::Snow);
  EXPECT_EQ(cfg.workers, 3u);

  // Worker count does not enter the digest; seeds and rates do.
  auto other = cfg;
  other.workers = 9;
  EXPECT_EQ(other.digest(), cfg.digest());
  other.seed = 6;
  EXPECT_NE(other.digest(), cfg.digest());

  EXPECT_THROW(JobConfig::parse("[job]\nsource_root = a\noutput_root = a\nvariants = snow\n", base), Error);
  EXPECT_THROW(JobConfig::parse("[job]\nsource_root = a\noutput_root = b\nvariants =\n", base), Error);
  EXPECT_THROW(JobConfig::parse("[job]\nsource_root = a\noutput_root = b\nvariants = fog\n", base), Error);
  EXPECT_THROW(JobConfig::parse("[other]\nx = 1\n", base), Error);
  fs::remove_all(base);
}

TEST(Manifest, JsonLinesRoundTrip) {
  pipeline::Manifest m;
  m.tool_version = "0.1.0";
  m.config_digest = "abc";
  m.dataset = "semantickitti";
  m.variants = {"snow"};
  m.frame_count = 2;
  pipeline::FrameRecord ok;
  ok.variant = "snow";
  ok.relative_path = "sequences/00/velodyne/000000.bin";
  ok.method = "physics-monte-carlo";
  ok.input_points = 10;
  ok.output_points = 9;
  ok.summary = {8, 1, 1};
  ok.alpha_used = 0.0017853981633974483;
  ok.seed = 18446744073709551557ull;
  ok.sha256 = "ff";
  pipeline::FrameRecord bad = ok;
  bad.status = "error";
  bad.error = "TruncatedFile: 33 bytes";
  m.records = {ok, bad};
  const auto text = m.to_jsonl();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(pipeline::Manifest::from_jsonl(text), m);
  EXPECT_THROW(pipeline::Manifest::from_jsonl("{\"record\":\"frame\"}\n"), Error);
}

TEST(JobConfig, ShippedExampleParses) {
  const auto cfg = JobConfig::load(fs::path(REALITYGEN_DATA_DIR) / "example_job.cfg");
  EXPECT_EQ(cfg.variants.size(), 3u);
  EXPECT_EQ(cfg.weather.at(Variant::Snow).rate_mm_h, 5.0);
  EXPECT_EQ(cfg.weather.at(Variant::Rain).rate_mm_h, 10.0);
  EXPECT_EQ(cfg.workers, 8u);
}
