#include "autosign/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "autosign/ctc.hpp"

namespace autosign {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

  const unsigned char* take(std::size_t n) {
    if (at_ + n > bytes_.size())
      throw CorruptionError("truncated checkpoint: " + path_);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes_.data()) + at_;
    at_ += n;
    return p;
  }
  std::uint32_t u32() {
    const unsigned char* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    const unsigned char* p = take(8);
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
  std::string str(std::size_t n) {
    const unsigned char* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool exhausted() const { return at_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string path_;
  std::size_t at_ = 0;
};

}  // namespace

std::unique_ptr<Recognizer> make_recognizer(const std::string& kind, const ModelConfig& cfg,
                                            std::uint64_t seed) {
  if (kind == "autoregressive") return std::make_unique<AutoSignModel>(cfg, seed);
  if (kind == "ctc") return std::make_unique<CtcModel>(cfg, seed);
  throw ConfigError("unknown model kind '" + kind + "'");
}

std::string encode_model_config(const std::string& kind, const ModelConfig& cfg) {
  std::ostringstream os;
  os << "compressor_channels=" << cfg.compressor.channels << "\n"
     << "compressor_kernel=" << cfg.compressor.kernel << "\n"
     << "compressor_layers=" << cfg.compressor.n_layers << "\n"
     << "compressor_padding=" << cfg.compressor.padding << "\n"
     << "compressor_stride=" << cfg.compressor.stride << "\n"
     << "d_model=" << cfg.d_model << "\n";
  char drop[64];
  std::snprintf(drop, sizeof(drop), "dropout=%.17g\n", cfg.dropout_p);
  os << drop << "ffn_mult=" << cfg.ffn_mult << "\n"
     << "input_dim=" << cfg.input_dim << "\n"
     << "kind=" << kind << "\n"
     << "max_prefix_len=" << cfg.max_prefix_len << "\n"
     << "max_text_len=" << cfg.max_text_len << "\n"
     << "n_heads=" << cfg.n_heads << "\n"
     << "n_layers=" << cfg.n_layers << "\n"
     << "vocab_size=" << cfg.vocab_size << "\n";
  return os.str();
}

std::pair<std::string, ModelConfig> decode_model_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("bad config line in checkpoint: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto want = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("checkpoint config misses ") + key);
    return it->second;
  };
  ModelConfig cfg;
  cfg.compressor.channels = std::stol(want("compressor_channels"));
  cfg.compressor.kernel = std::stol(want("compressor_kernel"));
  cfg.compressor.n_layers = static_cast<int>(std::stol(want("compressor_layers")));
  cfg.compressor.padding = std::stol(want("compressor_padding"));
  cfg.compressor.stride = std::stol(want("compressor_stride"));
  cfg.d_model = std::stol(want("d_model"));
  cfg.dropout_p = std::stod(want("dropout"));
  cfg.ffn_mult = std::stol(want("ffn_mult"));
  cfg.input_dim = std::stol(want("input_dim"));
  cfg.max_prefix_len = std::stol(want("max_prefix_len"));
  cfg.max_text_len = std::stol(want("max_text_len"));
  cfg.n_heads = std::stol(want("n_heads"));
  cfg.n_layers = std::stol(want("n_layers"));
  cfg.vocab_size = std::stol(want("vocab_size"));
  return {want("kind"), cfg};
}

void save_checkpoint(const std::string& path, const Recognizer& model,
                     const Vocabulary& vocab) {
  const std::string cfg_text = encode_model_config(model.kind(), model.config());
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(cfg_text.size()));
  out += cfg_text;

  const std::vector<std::string> glosses = vocab.gloss_tokens();
  put_u32(out, static_cast<std::uint32_t>(glosses.size()));
  for (const std::string& g : glosses) {
    put_u32(out, static_cast<std::uint32_t>(g.size()));
    out += g;
  }

  const ParamStore& params = model.params();
  put_u32(out, static_cast<std::uint32_t>(params.names.size()));
  for (std::size_t i = 0; i < params.names.size(); ++i) {
    const std::string& name = params.names[i];
    const Tensor& t = params.tensors[i];
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (Index d : t.shape()) put_u64(out, static_cast<std::uint64_t>(d));
    for (Index j = 0; j < t.numel(); ++j) put_f64(out, t.data()[j]);
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  Reader r(bytes, path);
  if (std::memcmp(r.take(4), kMagic, 4) != 0)
    throw FormatError("bad checkpoint magic in " + path);
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ck;
  const std::uint32_t cfg_len = r.u32();
  auto [kind, cfg] = decode_model_config(r.str(cfg_len));
  ck.kind = kind;
  ck.config = cfg;

  const std::uint32_t n_gloss = r.u32();
  std::vector<std::string> glosses;
  glosses.reserve(n_gloss);
  for (std::uint32_t i = 0; i < n_gloss; ++i) {
    const std::uint32_t len = r.u32();
    glosses.push_back(r.str(len));
  }
  ck.vocab = Vocabulary(std::move(glosses));

  const std::uint32_t n_arrays = r.u32();
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    const std::uint32_t rank = r.u32();
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d)
      shape.push_back(static_cast<Index>(r.u64()));
    Tensor t = Tensor::zeros(shape, /*requires_grad=*/true);
    for (Index j = 0; j < t.numel(); ++j) t.data()[j] = r.f64();
    ck.params.names.push_back(name);
    ck.params.tensors.push_back(std::move(t));
  }
  if (!r.exhausted()) throw CorruptionError("trailing bytes in checkpoint " + path);
  return ck;
}

std::unique_ptr<Recognizer> load_recognizer(const std::string& path, Vocabulary* vocab) {
  Checkpoint ck = load_checkpoint(path);
  if (vocab) *vocab = ck.vocab;
  if (ck.kind == "autoregressive")
    return std::make_unique<AutoSignModel>(ck.config, std::move(ck.params));
  if (ck.kind == "ctc") return std::make_unique<CtcModel>(ck.config, std::move(ck.params));
  throw FormatError("checkpoint has unknown model kind '" + ck.kind + "'");
}

}  // namespace autosign
