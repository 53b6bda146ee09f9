#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "specpercept/fit.hpp"
#include "specpercept/gradients.hpp"
#include "specpercept/mel.hpp"
#include "specpercept/metrics.hpp"
#include "specpercept/quantize.hpp"
#include "specpercept/resample.hpp"
#include "specpercept/sgram.hpp"
#include "specpercept/stft.hpp"
#include "specpercept/wav.hpp"

namespace sp = specpercept;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Integral values print without a decimal point ("32768"), everything else
// shortest round-trip ("0.5").
std::string fmt_count(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return fmt_double(v);
}

std::string fmt_bpp(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v)) + ".0";
  }
  return fmt_double(v);
}

void add_mel_flags(CLI::App* cmd, sp::MelParams& p) {
  cmd->add_option("--sample-rate", p.sample_rate, "analysis sample rate (Hz)")
      ->capture_default_str();
  cmd->add_option("--n-fft", p.n_fft, "FFT size")->capture_default_str();
  cmd->add_option("--hop", p.hop, "hop length (samples)")->capture_default_str();
  cmd->add_option("--n-mels", p.n_mels, "mel bands")->capture_default_str();
  cmd->add_option("--eps", p.eps, "log offset")->capture_default_str();
  cmd->add_option("--target-frames", p.target_frames, "output frame count")
      ->capture_default_str();
}

sp::Spectrogram wav_to_spectrogram(const std::string& path, const sp::MelParams& params) {
  sp::AudioClip clip = sp::load_wav(path);
  clip = sp::resample(clip, params.sample_rate);
  return sp::mel_spectrogram(clip, params);
}

// WAV and SGRAM inputs are told apart by their magic bytes, falling back to
// the file extension for anything unreadable in the first four bytes.
sp::Spectrogram load_compare_input(const std::string& path, const sp::MelParams& params) {
  {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw sp::IoError("cannot open " + path);
    char magic[4] = {0, 0, 0, 0};
    f.read(magic, 4);
    if (f.gcount() == 4) {
      if (std::string(magic, 4) == "SGRM") return sp::load_sgram(path);
      if (std::string(magic, 4) == "RIFF") return wav_to_spectrogram(path, params);
    }
  }
  auto ends_with = [&](const char* suf) {
    const std::string s(suf);
    return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".sgram")) return sp::load_sgram(path);
  if (ends_with(".wav")) return wav_to_spectrogram(path, params);
  throw sp::FormatError("cannot identify input type of " + path);
}

size_t worker_cap() {
  if (const char* env = std::getenv("SPECTRAL_PERCEPT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw sp::ParamError("SPECTRAL_PERCEPT_THREADS must be a positive integer");
    }
    return static_cast<size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

struct ComparePair {
  std::string ref, deg;
};

std::vector<ComparePair> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw sp::IoError("cannot open manifest " + path);
  std::vector<ComparePair> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string ref, deg, extra;
    if (!(ss >> ref)) continue;  // blank
    if (ref[0] == '#') continue;
    if (!(ss >> deg) || (ss >> extra)) {
      throw sp::FormatError("manifest " + path + " line " + std::to_string(lineno) +
                            ": expected exactly two paths");
    }
    pairs.push_back({ref, deg});
  }
  return pairs;
}

int cmd_spectrogram(const std::string& in, const std::string& out, const sp::MelParams& params) {
  const sp::Spectrogram spec = wav_to_spectrogram(in, params);
  sp::save_sgram(spec, out);
  std::cout << spec.values.rows << "x" << spec.values.cols << " log_lo=" << fmt_double(spec.log_lo)
            << " log_hi=" << fmt_double(spec.log_hi) << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& inputs, const std::string& manifest, bool csv,
                const sp::MelParams& params) {
  std::vector<ComparePair> pairs;
  if (!manifest.empty()) {
    if (!inputs.empty()) throw sp::ParamError("give either two paths or --manifest, not both");
    pairs = read_manifest(manifest);
  } else {
    if (inputs.size() != 2) throw sp::ParamError("compare needs a ref and a deg path");
    pairs.push_back({inputs[0], inputs[1]});
  }
  if (pairs.empty()) throw sp::ParamError("no pairs to compare");

  std::vector<sp::MetricReport> reports(pairs.size());
  std::vector<std::string> failures(pairs.size());
  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    size_t i;
    while ((i = cursor.fetch_add(1)) < pairs.size()) {
      try {
        const sp::Spectrogram ref = load_compare_input(pairs[i].ref, params);
        const sp::Spectrogram deg = load_compare_input(pairs[i].deg, params);
        reports[i] = sp::compare_grids(ref.values, deg.values);
      } catch (const std::exception& e) {
        failures[i] = std::string(e.what());
      }
    }
  };
  const size_t nthreads = std::min(worker_cap(), pairs.size());
  std::vector<std::thread> threads;
  for (size_t t = 1; t < nthreads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  bool failed = false;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!failures[i].empty()) {
      std::cerr << pairs[i].ref << " vs " << pairs[i].deg << ": " << failures[i] << "\n";
      failed = true;
    }
  }
  if (failed) return 1;

  if (csv) {
    std::cout << "ref,deg,mse,nlpd,ms_ssim\n";
    for (size_t i = 0; i < pairs.size(); ++i) {
      std::cout << pairs[i].ref << "," << pairs[i].deg << "," << fmt_double(reports[i].mse) << ","
                << fmt_double(reports[i].nlpd) << "," << fmt_double(reports[i].ms_ssim) << "\n";
    }
    return 0;
  }

  const sp::MsSsimParams mp;
  const sp::NlpdParams np;
  nlohmann::ordered_json j;
  j["params"] = {
      {"mel",
       {{"sample_rate", params.sample_rate},
        {"n_fft", params.n_fft},
        {"hop", params.hop},
        {"n_mels", params.n_mels},
        {"eps", params.eps},
        {"target_frames", params.target_frames}}},
      {"ms_ssim",
       {{"max_scales", mp.scales},
        {"window_size", mp.window_size},
        {"window_sigma", mp.window_sigma},
        {"c1", mp.c1},
        {"c2", mp.c2}}},
      {"nlpd", {{"levels", np.levels}, {"sigma", np.sigmas[0]}, {"exponent", np.exponent}}}};
  j["pairs"] = nlohmann::ordered_json::array();
  for (size_t i = 0; i < pairs.size(); ++i) {
    j["pairs"].push_back({{"ref", pairs[i].ref},
                          {"deg", pairs[i].deg},
                          {"mse", reports[i].mse},
                          {"nlpd", reports[i].nlpd},
                          {"ms_ssim", reports[i].ms_ssim}});
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_invert(const std::string& in, const std::string& out, int gl_iters, int n_fft, double eps,
               uint64_t seed) {
  sp::Spectrogram spec = sp::load_sgram(in);
  spec.params.n_fft = n_fft;  // not recorded in the file
  spec.params.eps = eps;
  const sp::Grid linear = sp::invert_mel(spec);
  const sp::AudioClip clip = sp::griffin_lim(linear, n_fft, spec.params.hop, gl_iters, seed,
                                             spec.params.sample_rate);
  sp::save_wav_pcm16(clip, out);
  std::cout << clip.samples.size() << " samples at " << clip.sample_rate << " Hz\n";
  return 0;
}

int cmd_fit(const std::string& target_path, const std::string& out, const sp::FitConfig& cfg) {
  const sp::Spectrogram target = sp::load_sgram(target_path);
  const sp::FitResult result = sp::fit_spectrogram(target.values, cfg);
  sp::Spectrogram fitted;
  fitted.values = result.final;
  fitted.params = target.params;
  fitted.log_lo = target.log_lo;
  fitted.log_hi = target.log_hi;
  sp::save_sgram(fitted, out);
  const sp::MetricReport rep = sp::fit_report(result, target.values);
  std::cout << "steps=" << result.steps_taken << " converged=" << (result.converged ? "true" : "false")
            << " final_loss=" << fmt_double(result.loss_trajectory.back()) << "\n";
  std::cout << "mse=" << fmt_double(rep.mse) << " nlpd=" << fmt_double(rep.nlpd)
            << " ms_ssim=" << fmt_double(rep.ms_ssim) << "\n";
  return 0;
}

int cmd_entropy(const sp::EntropyInputs& inp) {
  const double bits = sp::entropy_bound(inp);
  const double bpp = sp::bits_per_pixel(bits, inp.width, inp.height);
  const double ratio = sp::compression_ratio(bpp);
  std::cout << fmt_count(bits) << " bits, " << fmt_bpp(bpp) << " bpp, " << fmt_count(ratio)
            << ":1\n";
  return 0;
}

int cmd_gradcheck(sp::MetricKind kind, int size, uint64_t seed, double step) {
  std::mt19937_64 rng(seed);
  const sp::Grid a = sp::random_grid(size, size, rng);
  const sp::Grid b = sp::random_grid(size, size, rng);
  const sp::GradCheckStats stats = sp::grad_check(kind, a, b, step);
  std::cout << "max_rel=" << fmt_double(stats.max_rel) << " p99_rel=" << fmt_double(stats.p99_rel)
            << "\n";
  return stats.p99_rel < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mel-spectrogram perceptual metric toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  auto* sg = app.add_subcommand("spectrogram", "analyze a WAV into an SGRAM file");
  auto sg_in = std::make_shared<std::string>();
  auto sg_out = std::make_shared<std::string>();
  auto sg_params = std::make_shared<sp::MelParams>();
  sg->add_option("input", *sg_in, "input WAV")->required();
  sg->add_option("output", *sg_out, "output SGRAM")->required();
  add_mel_flags(sg, *sg_params);
  sg->callback([=, &rc]() { rc = cmd_spectrogram(*sg_in, *sg_out, *sg_params); });

  auto* cp = app.add_subcommand("compare", "metric triple over one or many pairs");
  auto cp_inputs = std::make_shared<std::vector<std::string>>();
  auto cp_manifest = std::make_shared<std::string>();
  auto cp_csv = std::make_shared<bool>(false);
  auto cp_params = std::make_shared<sp::MelParams>();
  cp->add_option("inputs", *cp_inputs, "ref and deg (WAV or SGRAM)")->expected(0, 2);
  cp->add_option("--manifest", *cp_manifest, "two-column file of ref/deg pairs");
  cp->add_flag("--csv", *cp_csv, "CSV instead of JSON");
  add_mel_flags(cp, *cp_params);
  cp->callback([=, &rc]() { rc = cmd_compare(*cp_inputs, *cp_manifest, *cp_csv, *cp_params); });

  auto* iv = app.add_subcommand("invert", "reconstruct audio from an SGRAM file");
  auto iv_in = std::make_shared<std::string>();
  auto iv_out = std::make_shared<std::string>();
  auto iv_iters = std::make_shared<int>(32);
  auto iv_nfft = std::make_shared<int>(1024);
  auto iv_eps = std::make_shared<double>(0.001);
  auto iv_seed = std::make_shared<uint64_t>(0);
  iv->add_option("input", *iv_in, "input SGRAM")->required();
  iv->add_option("output", *iv_out, "output WAV (PCM16 mono)")->required();
  iv->add_option("--gl-iters", *iv_iters, "phase-recovery iterations")->capture_default_str();
  iv->add_option("--n-fft", *iv_nfft, "FFT size used at analysis")->capture_default_str();
  iv->add_option("--eps", *iv_eps, "log offset used at analysis")->capture_default_str();
  iv->add_option("--seed", *iv_seed, "reserved for randomized phase init")->capture_default_str();
  iv->callback([=, &rc]() { rc = cmd_invert(*iv_in, *iv_out, *iv_iters, *iv_nfft, *iv_eps, *iv_seed); });

  auto* ft = app.add_subcommand("fit", "gradient-descend a grid toward a target SGRAM");
  auto ft_target = std::make_shared<std::string>();
  auto ft_out = std::make_shared<std::string>();
  auto ft_cfg = std::make_shared<sp::FitConfig>();
  const std::map<std::string, sp::FitLoss> loss_names{{"mse", sp::FitLoss::Mse},
                                                      {"nlpd", sp::FitLoss::Nlpd},
                                                      {"neg_ms_ssim", sp::FitLoss::NegMsSsim}};
  ft->add_option("--target", *ft_target, "target SGRAM")->required();
  ft->add_option("--out", *ft_out, "output SGRAM")->required();
  ft->add_option("--loss", ft_cfg->loss, "loss to minimize")
      ->transform(CLI::CheckedTransformer(loss_names, CLI::ignore_case))
      ->capture_default_str();
  ft->add_option("--steps", ft_cfg->max_steps, "step budget")->capture_default_str();
  ft->add_option("--seed", ft_cfg->seed, "initializer seed")->capture_default_str();
  ft->add_option("--initial-step", ft_cfg->initial_step, "starting step size")
      ->capture_default_str();
  ft->add_option("--tolerance", ft_cfg->tolerance, "convergence threshold")->capture_default_str();
  ft->callback([=, &rc]() { rc = cmd_fit(*ft_target, *ft_out, *ft_cfg); });

  auto* en = app.add_subcommand("entropy", "latent entropy bound, bpp, compression ratio");
  auto en_inp = std::make_shared<sp::EntropyInputs>();
  en->add_option("--width", en_inp->width, "input width (pixels)")->capture_default_str();
  en->add_option("--height", en_inp->height, "input height (pixels)")->capture_default_str();
  en->add_option("--layers", en_inp->layers, "downsampling layers")->capture_default_str();
  en->add_option("--channels", en_inp->channels, "embedding channels")->capture_default_str();
  en->add_option("--centers", en_inp->num_centers, "quantizer centers")->capture_default_str();
  en->callback([=, &rc]() { rc = cmd_entropy(*en_inp); });

  auto* gc = app.add_subcommand("gradcheck", "analytic vs finite-difference gradients");
  gc->set_help_flag("--help", "print help");  // frees -h for the --h step option
  auto gc_kind = std::make_shared<sp::MetricKind>(sp::MetricKind::Mse);
  auto gc_size = std::make_shared<int>(48);
  auto gc_seed = std::make_shared<uint64_t>(0);
  auto gc_step = std::make_shared<double>(1e-5);
  const std::map<std::string, sp::MetricKind> metric_names{{"mse", sp::MetricKind::Mse},
                                                           {"msssim", sp::MetricKind::MsSsim},
                                                           {"nlpd", sp::MetricKind::Nlpd}};
  gc->add_option("--metric", *gc_kind, "metric to check")
      ->transform(CLI::CheckedTransformer(metric_names, CLI::ignore_case))
      ->capture_default_str();
  gc->add_option("--size", *gc_size, "grid side length")->capture_default_str();
  gc->add_option("--seed", *gc_seed, "pair seed")->capture_default_str();
  gc->add_option("--h", *gc_step, "finite-difference step")->capture_default_str();
  gc->callback([=, &rc]() { rc = cmd_gradcheck(*gc_kind, *gc_size, *gc_seed, *gc_step); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
