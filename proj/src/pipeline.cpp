#include "realitygen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "realitygen/checksum.hpp"
#include "realitygen/config.hpp"
#include "realitygen/error.hpp"
#include "realitygen/physics.hpp"
#include "realitygen/rng.hpp"
#include "realitygen/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace realitygen::pipeline {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Snow: return "snow";
    case Variant::Rain: return "rain";
    case Variant::IntensityAdapted: return "intensity_adapted";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "snow") return Variant::Snow;
  if (n == "rain") return Variant::Rain;
  if (n == "intensity_adapted" || n == "intensity-adapted") return Variant::IntensityAdapted;
  throw Error(ErrorKind::InvalidConfig, "unknown variant '" + name + "'");
}

weather::DistortResult augment_frame(const PointCloud& cloud,
                                     const projection::SensorProfile& profile,
                                     const physics::MaterialTable* materials,
                                     const weather::WeatherParams& params, unsigned workers) {
  auto image = projection::project(cloud, profile, materials);
  image = projection::compute_incidence(cloud, std::move(image));
  return weather::distort(cloud, image, params, workers);
}

PointCloud adapt_intensity(const PointCloud& cloud, const projection::SensorProfile& profile,
                           const physics::MaterialTable& materials) {
  auto image = projection::project(cloud, profile, &materials);
  image = projection::compute_incidence(cloud, std::move(image));
  const auto reference = physics::reference_image(image, physics::AttenuationParams::clear());
  return projection::unproject(reference, cloud, projection::UnprojectedPolicy::Keep);
}

PointCloud splice_intensity(const PointCloud& cloud, const projection::SensorProfile& profile,
                            const projection::DumpedImage& external) {
  auto image = projection::project(cloud, profile);
  if (external.height != std::uint32_t(image.height()) ||
      external.width != std::uint32_t(image.width()) ||
      external.planes < std::uint32_t(projection::kChannelCount)) {
    throw Error(ErrorKind::ShapeMismatch, "external intensity image does not match the profile");
  }
  const std::size_t n = image.pixel_count();
  const std::size_t offset = std::size_t(projection::Channel::Intensity) * n;
  auto intensity = image.plane(projection::Channel::Intensity);
  const auto mask = image.plane(projection::Channel::Mask);
  for (std::size_t k = 0; k < n; ++k) {
    if (mask[k] != 0.f) intensity[k] = std::clamp(external.values[offset + k], 0.f, 1.f);
  }
  return projection::unproject(image, cloud, projection::UnprojectedPolicy::Keep);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

weather::WeatherParams default_weather(Variant v) {
  weather::WeatherParams p;
  // Rates are not published for the released variants; these are our defaults.
  if (v == Variant::Snow) {
    p.weather = weather::Precipitation::Snow;
    p.rate_mm_h = 5.0;
  } else {
    p.weather = weather::Precipitation::Rain;
    p.rate_mm_h = 10.0;
  }
  return p;
}

}  // namespace

JobConfig JobConfig::parse(const std::string& text, const fs::path& base_dir) {
  const config::Document doc = config::parse_text(text);
  const config::KeyValues empty;
  const config::KeyValues* job = doc.section("job");
  if (job == nullptr) throw Error(ErrorKind::InvalidConfig, "missing [job] section");

  JobConfig cfg;
  cfg.dataset = io::parse_dataset_kind(config::get_string(*job, "dataset", "semantickitti"));
  const std::string source = config::get_string(*job, "source_root", "");
  const std::string output = config::get_string(*job, "output_root", "");
  if (source.empty() || output.empty()) {
    throw Error(ErrorKind::InvalidConfig, "source_root and output_root are required");
  }
  cfg.source_root = resolve(base_dir, source);
  cfg.output_root = resolve(base_dir, output);
  for (const auto& name : split_list(config::get_string(*job, "variants", ""))) {
    const Variant v = parse_variant(name);
    if (std::find(cfg.variants.begin(), cfg.variants.end(), v) == cfg.variants.end()) {
      cfg.variants.push_back(v);
    }
  }
  cfg.seed = config::get_u64(*job, "seed", 0);
  cfg.workers = unsigned(std::max<long long>(1, config::get_int(*job, "workers", 1)));
  cfg.drop_invalid = config::get_bool(*job, "drop_invalid", false);
  cfg.use_labels = config::get_bool(*job, "use_labels", true);
  cfg.enumerate.nuscenes_keyframe_dir =
      config::get_string(*job, "nuscenes_keyframe_dir", cfg.enumerate.nuscenes_keyframe_dir);
  cfg.enumerate.strict_sequences = config::get_bool(*job, "strict_sequences", false);

  const std::string default_profile =
      cfg.dataset == io::DatasetKind::Nuscenes ? "nuscenes32" : "hdl64";
  cfg.profile = projection::SensorProfile::by_name(config::get_string(*job, "profile", default_profile));
  if (const auto* prof = doc.section("profile")) {
    cfg.profile.channels = int(config::get_int(*prof, "channels", cfg.profile.channels));
    cfg.profile.fov_up_deg = config::get_double(*prof, "fov_up_deg", cfg.profile.fov_up_deg);
    cfg.profile.fov_down_deg = config::get_double(*prof, "fov_down_deg", cfg.profile.fov_down_deg);
    cfg.profile.width = int(config::get_int(*prof, "width", cfg.profile.width));
    cfg.profile.max_range = config::get_double(*prof, "max_range", cfg.profile.max_range);
    cfg.profile.intensity_scale =
        config::get_double(*prof, "intensity_scale", cfg.profile.intensity_scale);
  }

  const std::string table = config::get_string(*job, "material_table", "");
  if (!table.empty()) cfg.materials = physics::MaterialTable::load(resolve(base_dir, table));

  const std::string images = config::get_string(*job, "intensity_images", "");
  if (!images.empty()) cfg.intensity_images = resolve(base_dir, images);

  for (Variant v : cfg.variants) {
    if (v == Variant::IntensityAdapted) continue;
    const config::KeyValues* block = doc.section(to_string(v));
    weather::WeatherParams params =
        weather::WeatherParams::from_config(block ? *block : empty, default_weather(v));
    // The section name fixes the precipitation type.
    params.weather = v == Variant::Snow ? weather::Precipitation::Snow : weather::Precipitation::Rain;
    cfg.weather[v] = params;
  }
  cfg.validate();
  return cfg;
}

JobConfig JobConfig::load(const fs::path& path) {
  const auto bytes = io::read_file(path);
  const std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return parse(text, path.parent_path());
}

void JobConfig::validate() const {
  if (variants.empty()) throw Error(ErrorKind::InvalidConfig, "variants must not be empty");
  if (source_root.empty() || output_root.empty()) {
    throw Error(ErrorKind::InvalidConfig, "source_root and output_root are required");
  }
  if (fs::weakly_canonical(source_root) == fs::weakly_canonical(output_root)) {
    throw Error(ErrorKind::InvalidConfig, "output_root must differ from source_root");
  }
  profile.validate();
  for (Variant v : variants) {
    if (v == Variant::IntensityAdapted) continue;
    auto it = weather.find(v);
    if (it == weather.end()) {
      throw Error(ErrorKind::InvalidConfig, "no weather parameters for " + to_string(v));
    }
    it->second.validate();
  }
}

std::string JobConfig::canonical_text() const {
  std::ostringstream out;
  out << "dataset=" << io::to_string(dataset) << '\n';
  out << "source_root=" << fs::weakly_canonical(source_root).generic_string() << '\n';
  out << "variants=";
  for (std::size_t i = 0; i < variants.size(); ++i) out << (i ? "," : "") << to_string(variants[i]);
  out << '\n';
  out << "seed=" << seed << '\n';
  out << "drop_invalid=" << drop_invalid << '\n';
  out << "use_labels=" << use_labels << '\n';
  out << "nuscenes_keyframe_dir=" << enumerate.nuscenes_keyframe_dir << '\n';
  out << "strict_sequences=" << enumerate.strict_sequences << '\n';
  out << "profile.channels=" << profile.channels << '\n';
  out << "profile.fov_up_deg=" << num(profile.fov_up_deg) << '\n';
  out << "profile.fov_down_deg=" << num(profile.fov_down_deg) << '\n';
  out << "profile.width=" << profile.width << '\n';
  out << "profile.max_range=" << num(profile.max_range) << '\n';
  out << "profile.intensity_scale=" << num(profile.intensity_scale) << '\n';
  out << "materials.default=" << num(materials.default_reflectance()) << '\n';
  for (const auto& [id, r] : materials.entries()) out << "materials." << id << '=' << num(r) << '\n';
  if (intensity_images) {
    out << "intensity_images=" << fs::weakly_canonical(*intensity_images).generic_string() << '\n';
  }
  for (const auto& [v, p] : weather) {
    const std::string k = to_string(v) + ".";
    out << k << "rate_mm_h=" << num(p.rate_mm_h) << '\n';
    out << k << "noise_floor=" << num(p.noise_floor) << '\n';
    out << k << "beam_divergence_rad=" << num(p.beam_divergence_rad) << '\n';
    out << k << "alpha_override=" << (p.alpha_override ? num(*p.alpha_override) : "none") << '\n';
    out << k << "particle_density_override="
        << (p.particle_density_override ? num(*p.particle_density_override) : "none") << '\n';
    out << k << "beta_rain=" << num(p.beta_rain) << '\n';
    out << k << "beta_snow=" << num(p.beta_snow) << '\n';
    out << k << "r_min=" << num(p.r_min) << '\n';
  }
  return out.str();
}

std::string JobConfig::digest() const { return sha256_hex(canonical_text()); }

std::uint64_t frame_seed(std::uint64_t global_seed, const std::string& relative_path) {
  return stream_key(global_seed, stable_hash64(relative_path));
}

// ---------------------------------------------------------------------------

std::size_t Manifest::failed() const {
  return std::size_t(std::count_if(records.begin(), records.end(),
                                   [](const FrameRecord& r) { return !r.ok(); }));
}

const FrameRecord* Manifest::find(const std::string& variant,
                                  const std::string& relative_path) const {
  for (const auto& r : records) {
    if (r.variant == variant && r.relative_path == relative_path) return &r;
  }
  return nullptr;
}

std::string Manifest::to_jsonl() const {
  std::string out;
  json header = {{"record", "header"},       {"tool", "realitygen"},
                 {"tool_version", tool_version}, {"config_digest", config_digest},
                 {"dataset", dataset},       {"variants", variants},
                 {"frames", frame_count}};
  out += header.dump() + '\n';
  for (const auto& r : records) {
    json j = {{"record", "frame"},
              {"variant", r.variant},
              {"path", r.relative_path},
              {"status", r.status},
              {"method", r.method},
              {"input_points", r.input_points},
              {"output_points", r.output_points},
              {"kept", r.summary.kept},
              {"relocated", r.summary.relocated},
              {"dropped", r.summary.dropped},
              {"alpha_used", r.alpha_used},
              {"seed", r.seed},
              {"sha256", r.sha256}};
    if (!r.ok()) j["error"] = r.error;
    out += j.dump() + '\n';
  }
  return out;
}

Manifest Manifest::from_jsonl(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (j.at("record") == "header") {
        m.tool_version = j.at("tool_version");
        m.config_digest = j.at("config_digest");
        m.dataset = j.at("dataset");
        m.variants = j.at("variants").get<std::vector<std::string>>();
        m.frame_count = j.at("frames");
        have_header = true;
        continue;
      }
      FrameRecord r;
      r.variant = j.at("variant");
      r.relative_path = j.at("path");
      r.status = j.at("status");
      r.method = j.at("method");
      r.input_points = j.at("input_points");
      r.output_points = j.at("output_points");
      r.summary.kept = j.at("kept");
      r.summary.relocated = j.at("relocated");
      r.summary.dropped = j.at("dropped");
      r.alpha_used = j.at("alpha_used");
      r.seed = j.at("seed");
      r.sha256 = j.at("sha256");
      if (j.contains("error")) r.error = j.at("error");
      m.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("malformed manifest: ") + e.what());
  }
  if (!have_header) throw Error(ErrorKind::InvalidConfig, "manifest has no header record");
  return m;
}

Manifest Manifest::read(const fs::path& path) {
  const auto bytes = io::read_file(path);
  return from_jsonl(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void Manifest::write(const fs::path& path) const {
  const std::string text = to_jsonl();
  io::write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

namespace {

FrameRecord process_frame(const JobConfig& cfg, const io::DatasetLayout& layout,
                          const std::string& frame, Variant variant) {
  FrameRecord rec;
  rec.variant = to_string(variant);
  rec.relative_path = frame;
  rec.seed = frame_seed(cfg.seed, frame);
  try {
    io::ReadOptions read_options;
    read_options.drop_invalid = cfg.drop_invalid;
    PointCloud cloud =
        io::read_sweep(layout.frame_path(frame), io::format_for(cfg.dataset), read_options);
    rec.input_points = cloud.size();
    if (cfg.use_labels) {
      if (auto label = layout.label_path(frame)) {
        cloud = io::attach_labels(std::move(cloud), io::read_labels(*label));
      }
    }

    PointCloud output;
    if (variant == Variant::IntensityAdapted) {
      if (cfg.intensity_images) {
        const auto external =
            projection::read_dump(fs::path(cfg.intensity_images->string() + "/" + frame + ".rimg"));
        output = splice_intensity(cloud, cfg.profile, external);
        rec.method = "external-intensity";
      } else {
        output = adapt_intensity(cloud, cfg.profile, cfg.materials);
        rec.method = "physics-reference";
      }
      rec.summary.kept = output.size();
    } else {
      weather::WeatherParams params = cfg.weather.at(variant);
      params.seed = rec.seed;
      auto result = augment_frame(cloud, cfg.profile, &cfg.materials, params);
      output = std::move(result.cloud);
      rec.summary = result.outcome.summary;
      rec.alpha_used = result.outcome.alpha_used;
      rec.method = "physics-monte-carlo";
    }

    const auto bytes = io::serialize_sweep(output);
    io::write_file(cfg.output_root / to_string(variant) / frame, bytes);
    rec.output_points = output.size();
    rec.sha256 = sha256_hex(bytes);
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

Manifest run_job(const JobConfig& cfg) {
  cfg.validate();
  const io::DatasetLayout layout = io::enumerate_frames(cfg.source_root, cfg.dataset, cfg.enumerate);

  Manifest manifest;
  manifest.tool_version = kVersion;
  manifest.config_digest = cfg.digest();
  manifest.dataset = io::to_string(cfg.dataset);
  for (Variant v : cfg.variants) manifest.variants.push_back(to_string(v));
  manifest.frame_count = layout.frame_ids.size();

  // Tasks ordered variant-major so the manifest layout never depends on scheduling.
  const std::size_t frames = layout.frame_ids.size();
  const std::size_t tasks = frames * cfg.variants.size();
  manifest.records.resize(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      manifest.records[t] =
          process_frame(cfg, layout, layout.frame_ids[t % frames], cfg.variants[t / frames]);
    }
  };
  {
    const unsigned n = std::max(1u, std::min<unsigned>(cfg.workers, unsigned(tasks)));
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }

  manifest.write(cfg.output_root / kManifestName);
  return manifest;
}

// ---------------------------------------------------------------------------

std::string CorrespondenceReport::to_text() const {
  std::ostringstream out;
  for (const auto& p : missing) out << "missing " << p << '\n';
  for (const auto& p : extra) out << "extra " << p << '\n';
  for (const auto& f : format_violations) out << "format " << f.relative_path << ": " << f.detail << '\n';
  for (const auto& f : point_count_violations) {
    out << "point_count " << f.relative_path << ": " << f.detail << '\n';
  }
  for (const auto& f : manifest_mismatches) {
    out << "manifest " << f.relative_path << ": " << f.detail << '\n';
  }
  return out.str();
}

CorrespondenceReport validate_correspondence(const io::DatasetLayout& source,
                                             const fs::path& derived_root) {
  CorrespondenceReport report;
  const FormatTag format = io::format_for(source.dataset);

  std::optional<Manifest> manifest;
  std::string variant = derived_root.filename().string();
  if (variant.empty()) variant = derived_root.parent_path().filename().string();
  for (const fs::path& candidate :
       {derived_root / kManifestName, derived_root.parent_path() / kManifestName}) {
    if (fs::exists(candidate)) {
      try {
        manifest = Manifest::read(candidate);
      } catch (const Error& e) {
        report.manifest_mismatches.push_back({kManifestName, e.what()});
      }
      break;
    }
  }

  std::set<std::string> expected(source.frame_ids.begin(), source.frame_ids.end());
  if (fs::is_directory(derived_root)) {
    for (const auto& entry : fs::recursive_directory_iterator(derived_root)) {
      if (!entry.is_regular_file()) continue;
      const std::string rel = fs::relative(entry.path(), derived_root).generic_string();
      if (rel == kManifestName) continue;
      if (!expected.count(rel)) report.extra.push_back(rel);
    }
  }
  std::sort(report.extra.begin(), report.extra.end());

  for (const auto& frame : source.frame_ids) {
    const fs::path path = derived_root / frame;
    if (!fs::exists(path)) {
      report.missing.push_back(frame);
      continue;
    }
    ++report.checked;
    std::vector<std::byte> bytes;
    PointCloud derived;
    try {
      bytes = io::read_file(path);
      derived = io::parse_sweep(bytes, format);
    } catch (const Error& e) {
      report.format_violations.push_back({frame, e.what()});
      continue;
    }
    const auto source_size = fs::file_size(source.frame_path(frame));
    const std::size_t source_points = source_size / record_size(format);
    report.point_delta += (long long)source_points - (long long)derived.size();
    if (derived.size() > source_points) {
      report.point_count_violations.push_back(
          {frame, std::to_string(derived.size()) + " points from a " +
                      std::to_string(source_points) + "-point source"});
    }
    if (manifest) {
      const FrameRecord* rec = manifest->find(variant, frame);
      if (rec == nullptr) {
        report.manifest_mismatches.push_back({frame, "no manifest record for " + variant});
      } else if (rec->output_points != derived.size()) {
        report.manifest_mismatches.push_back(
            {frame, "manifest says " + std::to_string(rec->output_points) + " points, file has " +
                        std::to_string(derived.size())});
      } else if (rec->sha256 != sha256_hex(bytes)) {
        report.manifest_mismatches.push_back({frame, "checksum differs from manifest"});
      }
    }
  }
  return report;
}

}  // namespace realitygen::pipeline
