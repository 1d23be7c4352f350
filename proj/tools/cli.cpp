// camsic command-line front end.
//
// Exit codes:
//   0 success
//   1 selftest failure
//   2 usage, I/O or image/JSON format error
//   3 weight file missing, unreadable or not matching the manifest
//   4 bitstream was produced with different weights
//   5 corrupted bitstream (magic, version, framing, CRC, payload)
//   6 RD report could not be computed (fewer than 4 points, no overlap)

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "camsic/codec.hpp"
#include "camsic/error.hpp"
#include "camsic/weights.hpp"

using namespace camsic;
using nlohmann::json;

namespace {

enum Exit : int {
  kOk = 0,
  kSelftestFailed = 1,
  kUsage = 2,
  kWeights = 3,
  kDigest = 4,
  kCorrupt = 5,
  kReport = 6,
};

struct ExitError {
  int code;
  std::string message;
};

bool is_corruption(ErrorCode c) {
  switch (c) {
    case ErrorCode::kBadMagic:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kChecksum:
    case ErrorCode::kTruncated:
    case ErrorCode::kDecode:
    case ErrorCode::kProtocol:
    case ErrorCode::kFormat:
    case ErrorCode::kSchedule:
      return true;
    default:
      return false;
  }
}

std::string resolve_weights_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CAMSIC_WEIGHTS"); env && *env) return env;
  throw ExitError{kUsage, "no weights given (use --weights or CAMSIC_WEIGHTS)"};
}

WeightStore load_weights_or_exit(const std::string& flag) {
  const std::string path = resolve_weights_path(flag);
  try {
    return load_weights_file(path);
  } catch (const Error& e) {
    throw ExitError{kWeights, std::string("cannot load weights: ") + e.what()};
  }
}

ImagePlane read_image(const std::string& path) {
  try {
    return read_ppm(path);
  } catch (const Error& e) {
    throw ExitError{kUsage, e.what()};
  }
}

Bytes read_container(const std::string& path) {
  try {
    return read_file(path);
  } catch (const Error& e) {
    throw ExitError{kUsage, e.what()};
  }
}

void write_output(const std::string& path, std::span<const std::uint8_t> bytes) {
  try {
    write_file(path, bytes);
  } catch (const Error& e) {
    throw ExitError{kUsage, e.what()};
  }
}

json view_log_json(const ViewLog& log) {
  json iters = json::array();
  for (const auto& it : log.iterations) {
    iters.push_back({{"count", it.count},
                     {"estimated_bits", it.estimated_bits},
                     {"actual_bits", it.table_bits},
                     {"context_crc", it.context_digest}});
  }
  return {{"forward_calls", log.forward_calls}, {"iterations", iters}};
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
  std::string left, right, weights, out, log;
  int steps = 0;
  std::string mode = "content";
};

int cmd_encode(const EncodeArgs& a) {
  const ImagePlane left = read_image(a.left);
  const ImagePlane right = read_image(a.right);
  const WeightStore weights = load_weights_or_exit(a.weights);
  CodecOptions opt;
  opt.steps = a.steps;
  opt.mode = a.mode == "constant" ? PriorMode::kConstantToken : PriorMode::kContentAware;

  PairEncoding enc;
  try {
    enc = encode_pair(left, right, weights, opt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema) throw ExitError{kWeights, e.what()};
    throw ExitError{kUsage, e.what()};
  }
  write_output(a.out, enc.stream);

  json views = json::array();
  for (int v = 0; v < 2; ++v) {
    const auto& p = enc.container.views[v];
    views.push_back({{"hyper_bits", p.hyper.size() * 8},
                     {"main_bits", p.main.size() * 8},
                     {"hyper_bits_estimated", enc.hyper_bits_estimated[v]},
                     {"main_bits_estimated", enc.logs[v].estimated_bits()}});
  }
  const double gap = double(enc.rd.bits_actual) - enc.rd.bits_estimated;
  const json summary = {{"bpp", enc.rd.bpp},
                        {"psnr", enc.rd.psnr},
                        {"bits_actual", enc.rd.bits_actual},
                        {"bits_estimated", enc.rd.bits_estimated},
                        {"gap_bits", gap},
                        {"steps", int(enc.container.steps)},
                        {"saturated", enc.saturated},
                        {"views", views}};
  std::cout << summary.dump() << "\n";

  if (!a.log.empty()) {
    json log = summary;
    log["view_logs"] = json::array({view_log_json(enc.logs[0]), view_log_json(enc.logs[1])});
    const std::string text = log.dump(2) + "\n";
    write_output(a.log, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct DecodeArgs {
  std::string in, weights, out_left, out_right, ref_left, ref_right;
};

int cmd_decode(const DecodeArgs& a) {
  const Bytes stream = read_container(a.in);
  const WeightStore weights = load_weights_or_exit(a.weights);
  PairDecoding dec;
  try {
    dec = decode_pair(stream, weights);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDigestMismatch) throw ExitError{kDigest, e.what()};
    if (is_corruption(e.code())) throw ExitError{kCorrupt, e.what()};
    throw;
  }
  try {
    write_ppm(a.out_left, dec.images[0]);
    write_ppm(a.out_right, dec.images[1]);
  } catch (const Error& e) {
    throw ExitError{kUsage, e.what()};
  }
  json out = {{"height", dec.images[0].height}, {"width", dec.images[0].width}};
  const std::string* refs[2] = {&a.ref_left, &a.ref_right};
  const char* keys[2] = {"psnr_left", "psnr_right"};
  for (int v = 0; v < 2; ++v) {
    if (refs[v]->empty()) continue;
    const ImagePlane ref = read_image(*refs[v]);
    try {
      out[keys[v]] = psnr(ref, dec.images[v]);
    } catch (const Error& e) {
      throw ExitError{kUsage, e.what()};
    }
  }
  std::cout << out.dump() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_inspect(const std::string& in) {
  const Bytes bytes = read_container(in);
  Bitstream s;
  try {
    s = parse_bitstream(bytes);
  } catch (const Error& e) {
    throw ExitError{kCorrupt, e.what()};
  }
  char digest[9];
  std::snprintf(digest, sizeof digest, "%08x", s.digest);
  json views = json::array();
  for (const auto& v : s.views) {
    views.push_back({{"height", v.height},
                     {"width", v.width},
                     {"hyper_bytes", v.hyper.size()},
                     {"main_bytes", v.main.size()}});
  }
  const json out = {{"version", s.version},
                    {"mode", s.mode == PriorMode::kContentAware ? "content" : "constant"},
                    {"steps", int(s.steps)},
                    {"weights_digest", digest},
                    {"total_bytes", bytes.size()},
                    {"overhead_bytes", bitstream_overhead_bytes()},
                    {"bpp", double(bytes.size()) * 8.0 / (2.0 * s.views[0].height * s.views[0].width)},
                    {"views", views}};
  std::cout << out.dump() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

std::vector<RdSample> read_points(const std::string& path) {
  const Bytes raw = read_container(path);
  json doc;
  try {
    doc = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    throw ExitError{kUsage, path + ": " + e.what()};
  }
  // Either a bare array or {"points": [...]}; each point {"bpp": x, "psnr": y}.
  const json& arr = doc.is_object() && doc.contains("points") ? doc["points"] : doc;
  if (!arr.is_array()) throw ExitError{kUsage, path + ": expected an array of RD points"};
  std::vector<RdSample> out;
  for (const auto& p : arr) {
    if (!p.is_object() || !p.contains("bpp") || !p.contains("psnr") || !p["bpp"].is_number() ||
        !p["psnr"].is_number()) {
      throw ExitError{kUsage, path + ": each point needs numeric bpp and psnr"};
    }
    out.push_back({p["bpp"].get<double>(), p["psnr"].get<double>()});
  }
  return out;
}

int cmd_rd_report(const std::string& points_path, const std::string& anchor_path, const std::string& csv_path) {
  const auto points = read_points(points_path);
  const auto anchor = read_points(anchor_path);
  double rate = 0.0, dpsnr = 0.0;
  try {
    rate = bd_rate(points, anchor);
    dpsnr = bd_psnr(points, anchor);
  } catch (const Error& e) {
    throw ExitError{kReport, e.what()};
  }
  char line[128];
  std::string csv = "metric,value\n";
  std::snprintf(line, sizeof line, "bd_rate_percent,%.6f\nbd_psnr_db,%.6f\n", rate, dpsnr);
  csv += line;
  std::cout << csv;
  if (!csv_path.empty()) {
    std::string table = "curve,bpp,psnr\n";
    for (const auto& p : points) {
      std::snprintf(line, sizeof line, "points,%.9g,%.9g\n", p.bpp, p.psnr);
      table += line;
    }
    for (const auto& p : anchor) {
      std::snprintf(line, sizeof line, "anchor,%.9g,%.9g\n", p.bpp, p.psnr);
      table += line;
    }
    table += csv;
    write_output(csv_path, std::span(reinterpret_cast<const std::uint8_t*>(table.data()), table.size()));
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct Check {
  const char* name;
  bool (*run)(bool fault);
};

bool check_coder_round_trip(bool fault) {
  std::mt19937_64 rng(0x5e1f7e57);
  std::uniform_real_distribution<double> mu_d(-20.0, 20.0), log_sigma_d(std::log(0.11), std::log(256.0));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CdfTable> tables;
    std::vector<int> symbols;
    for (int i = 0; i < 500; ++i) {
      const double mu = mu_d(rng), sigma = std::exp(log_sigma_d(rng));
      tables.push_back(build_cdf(mu, sigma, -128, 127));
      std::normal_distribution<double> draw(mu, sigma);
      symbols.push_back(std::clamp(int(std::lround(draw(rng))), -128, 127));
    }
    Bytes payload = range_encode(symbols, tables);
    if (fault && !payload.empty()) payload[payload.size() / 2] ^= 0x5a;
    try {
      if (range_decode(payload, tables) != symbols) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

bool check_schedule_sums(bool) {
  for (int n = 1; n <= 512; ++n)
    for (int k = 1; k <= 16; ++k) {
      const Schedule s = schedule_counts(n, k);
      int sum = 0;
      for (int c : s.counts) {
        if (c < 0) return false;
        sum += c;
      }
      if (int(s.counts.size()) != k || sum != n) return false;
    }
  return true;
}

bool check_mask_mirror(bool) {
  const ModelConfig cfg = ModelConfig::desk();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const WeightStore weights = make_random_weights(cfg, seed);
    std::mt19937_64 rng(seed * 7919);
    std::uniform_int_distribution<int> sym(-6, 6);
    std::uniform_real_distribution<float> val(-2.0f, 2.0f);
    const int h = 5, w = 6;
    LatentGrid grid(h, w, cfg.latent_dim);
    for (auto& s : grid.symbols) s = sym(rng);
    Tensor content({h, w, cfg.latent_dim});
    for (auto& v : content.data()) v = val(rng);

    const ViewEncoding enc = encode_view(grid, content, weights, cfg.decode_steps);
    ViewLog dlog;
    const LatentGrid back = decode_view(enc.payload, content, weights, cfg.decode_steps, h, w, &dlog);
    if (!(back == grid)) return false;
    if (dlog.forward_calls != enc.log.forward_calls || dlog.iterations.size() != enc.log.iterations.size()) {
      return false;
    }
    for (std::size_t i = 0; i < dlog.iterations.size(); ++i) {
      const auto &a = enc.log.iterations[i], &b = dlog.iterations[i];
      if (a.selected != b.selected || a.context_digest != b.context_digest) return false;
    }
  }
  return true;
}

int cmd_selftest() {
  const char* fault_env = std::getenv("CAMSIC_SELFTEST_FAULT");
  const std::string fault = fault_env ? fault_env : "";
  const Check checks[] = {
      {"coder_round_trip", check_coder_round_trip},
      {"schedule_sums", check_schedule_sums},
      {"encoder_decoder_mask_mirror", check_mask_mirror},
  };
  int failed = 0;
  for (const auto& c : checks) {
    bool ok = false;
    try {
      ok = c.run(fault == "coder" && std::string(c.name) == "coder_round_trip");
    } catch (const Error& e) {
      std::cerr << c.name << ": " << e.what() << "\n";
    }
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << "\n";
    if (!ok) {
      std::cerr << "selftest property failed: " << c.name << "\n";
      ++failed;
    }
  }
  return failed == 0 ? kOk : kSelftestFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camsic stereo image codec"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode a stereo pair of P6 PPM images");
  encode->add_option("--left", enc.left, "left view (PPM)")->required();
  encode->add_option("--right", enc.right, "right view (PPM)")->required();
  encode->add_option("--weights", enc.weights, "CWTS weights (default: $CAMSIC_WEIGHTS)");
  encode->add_option("--out", enc.out, "output container")->required();
  encode->add_option("--steps", enc.steps, "decoding iterations K (default: from the weights config)")
      ->check(CLI::Range(1, 255));
  encode->add_option("--log", enc.log, "write a JSON rate log");
  encode->add_option("--mode", enc.mode, "prior: content or constant")
      ->check(CLI::IsMember({"content", "constant"}));

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Decode a container to two PPM images");
  decode->add_option("--in", dec.in, "input container")->required();
  decode->add_option("--weights", dec.weights, "CWTS weights (default: $CAMSIC_WEIGHTS)");
  decode->add_option("--out-left", dec.out_left, "left output (PPM)")->required();
  decode->add_option("--out-right", dec.out_right, "right output (PPM)")->required();
  decode->add_option("--ref-left", dec.ref_left, "original left view, for PSNR");
  decode->add_option("--ref-right", dec.ref_right, "original right view, for PSNR");

  std::string inspect_in;
  auto* inspect = app.add_subcommand("inspect", "Print container header fields without decoding");
  inspect->add_option("--in", inspect_in, "input container")->required();

  std::string points, anchor, csv;
  auto* report = app.add_subcommand("rd-report", "BD-rate and BD-PSNR of an RD curve against an anchor");
  report->add_option("--points", points, "JSON RD points")->required();
  report->add_option("--anchor", anchor, "JSON anchor RD points")->required();
  report->add_option("--csv", csv, "also write points and results as CSV");

  auto* selftest = app.add_subcommand("selftest", "Coder, schedule and encoder/decoder mirror checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (encode->parsed()) return cmd_encode(enc);
    if (decode->parsed()) return cmd_decode(dec);
    if (inspect->parsed()) return cmd_inspect(inspect_in);
    if (report->parsed()) return cmd_rd_report(points, anchor, csv);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const ExitError& e) {
    std::cerr << "camsic: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    std::cerr << "camsic: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
