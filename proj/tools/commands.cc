// Copyright 2026 The mmhash Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "commands.h"

#include <CLI11.hpp>

#include <fstream>
#include <nlohmann/json.hpp>

#include "mmhash/embedding.h"
#include "mmhash/encode.h"
#include "mmhash/errors.h"
#include "mmhash/evaluator.h"
#include "mmhash/hamming.h"
#include "mmhash/model.h"
#include "mmhash/trainer.h"

namespace mmhash::cli {
namespace {

using Json = nlohmann::ordered_json;

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw FormatError(FormatErrc::kIo, "cannot write " + path);
}

// Resolved configuration of one invocation; enough to rerun it.
void WriteRunManifest(const std::string& path, const std::string& command,
                      Json inputs, Json outputs, Json config) {
  Json doc = {
      {"tool", "mmhash"},
      {"tool_version", kToolVersion},
      {"command", command},
      {"inputs", std::move(inputs)},
      {"outputs", std::move(outputs)},
      {"config", std::move(config)},
  };
  WriteText(path, doc.dump(2) + "\n");
}

struct SynthFlags {
  uint32_t classes = 10;
  uint32_t per_class = 100;
  std::vector<uint32_t> dims = {512, 512};
  double noise = 0.05;
  uint64_t seed = 0;
  std::string out;
};

struct TrainFlags {
  std::string manifest;
  std::string out;
  std::string log;
  std::string optimizer = "adam";
  bool no_normalize = false;
  TrainConfig config;
};

struct EncodeFlags {
  std::string checkpoint;
  std::string input;
  std::string out;
};

struct EvalFlags {
  std::string manifest;
  std::vector<std::string> query_codes;
  std::vector<std::string> retrieval_codes;
  std::string out;
  std::string run_manifest;
};

struct SearchFlags {
  std::string index;
  std::string queries;
  std::string code;
  uint64_t query_id = 0;
  size_t topk = 10;
  std::string run_manifest;
};

void RunSynth(const SynthFlags& f, std::ostream& out) {
  SyntheticOptions options;
  options.class_count = f.classes;
  options.per_class = f.per_class;
  options.modality_dims = f.dims;
  options.noise_sigma = f.noise;
  options.seed = f.seed;
  const DatasetSplit split = GenerateSynthetic(options);
  const std::string manifest = WriteSplit(split, f.out);
  WriteRunManifest(
      f.out + ".run.json", "synth", Json::object(),
      {{"split_manifest", manifest},
       {"train", f.out + ".train.embx"},
       {"retrieval", f.out + ".retrieval.embx"},
       {"query", f.out + ".query.embx"}},
      {{"classes", f.classes},
       {"per_class", f.per_class},
       {"dims", f.dims},
       {"noise", f.noise},
       {"seed", f.seed}});
  out << "train " << split.train.sample_count() << "\tretrieval "
      << split.retrieval.sample_count() << "\tquery "
      << split.query.sample_count() << "\n"
      << manifest << "\n";
}

void RunTrain(TrainFlags f, std::ostream& out) {
  TrainConfig& config = f.config;
  config.optimizer =
      f.optimizer == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdam;
  config.normalize_inputs = !f.no_normalize;
  ValidateConfig(config);
  const DatasetSplit split = LoadSplit(f.manifest);
  const TrainResult result = Train(split, config);
  WriteCheckpoint(result.params, f.out);
  const std::string log_path = f.log.empty() ? f.out + ".log" : f.log;
  const std::string log = FormatTrainLog(result.log);
  WriteText(log_path, log);
  WriteRunManifest(f.out + ".run.json", "train",
                   {{"split_manifest", f.manifest}},
                   {{"checkpoint", f.out}, {"log", log_path}},
                   {{"bits", config.bits},
                    {"allow_any_bits", config.allow_any_bits},
                    {"epochs", config.epochs},
                    {"batch_size", config.batch_size},
                    {"learning_rate", config.learning_rate},
                    {"lambda_quant", config.lambda_quant},
                    {"normalize_inputs", config.normalize_inputs},
                    {"optimizer", f.optimizer},
                    {"beta1", config.beta1},
                    {"beta2", config.beta2},
                    {"epsilon", config.epsilon},
                    {"seed", config.seed}});
  out << log;
}

void RunEncode(const EncodeFlags& f, std::ostream& out) {
  const ModelParams params = ReadCheckpoint(f.checkpoint);
  const EmbeddingSet set = ReadEmbeddingFile(f.input);
  const BinaryCodeMatrix codes = EncodeSet(params, set);
  WriteCodeFile(codes, f.out);
  WriteRunManifest(f.out + ".run.json", "encode",
                   {{"checkpoint", f.checkpoint}, {"input", f.input}},
                   {{"codes", f.out}}, {{"bits", codes.bits}});
  out << "encoded " << codes.count() << " samples to " << codes.bits
      << "-bit codes\n";
}

void RunEval(const EvalFlags& f, std::ostream& out) {
  if (f.query_codes.size() != f.retrieval_codes.size()) {
    throw ArgumentError(
        "--query-codes and --retrieval-codes must be given the same number "
        "of times");
  }
  const DatasetSplit split = LoadSplit(f.manifest);
  std::vector<MapReport> reports;
  for (size_t i = 0; i < f.query_codes.size(); ++i) {
    const BinaryCodeMatrix query = ReadCodeFile(f.query_codes[i]);
    const BinaryCodeMatrix retrieval = ReadCodeFile(f.retrieval_codes[i]);
    if (query.bits != retrieval.bits) {
      throw ShapeError(f.query_codes[i] + " has " +
                       std::to_string(query.bits) + "-bit codes but " +
                       f.retrieval_codes[i] + " has " +
                       std::to_string(retrieval.bits));
    }
    reports.push_back(
        MeanAveragePrecision(split.query, split.retrieval, query, retrieval));
  }
  const std::string report = FormatMapReport(reports);
  if (!f.out.empty()) WriteText(f.out, report);
  std::string manifest_path = f.run_manifest;
  if (manifest_path.empty()) {
    manifest_path = (f.out.empty() ? f.query_codes.front() : f.out) +
                    ".eval.run.json";
  }
  Json outputs = Json::object();
  if (!f.out.empty()) outputs["report"] = f.out;
  WriteRunManifest(manifest_path, "eval",
                   {{"split_manifest", f.manifest},
                    {"query_codes", f.query_codes},
                    {"retrieval_codes", f.retrieval_codes}},
                   std::move(outputs), Json::object());
  out << report;
}

std::vector<uint64_t> ParseBitString(const std::string& text, uint32_t bits) {
  if (text.size() != bits) {
    throw ArgumentError("--code has " + std::to_string(text.size()) +
                        " characters, index codes have " +
                        std::to_string(bits) + " bits");
  }
  std::vector<uint64_t> words(WordsPerCode(bits), 0);
  for (uint32_t i = 0; i < bits; ++i) {
    if (text[i] == '1') {
      words[i / 64] |= uint64_t{1} << (i % 64);
    } else if (text[i] != '0') {
      throw ArgumentError("--code must consist of '0' and '1' (bit 0 first)");
    }
  }
  return words;
}

void RunSearch(const SearchFlags& f, bool by_id, std::ostream& out) {
  const BinaryCodeMatrix index = ReadCodeFile(f.index);
  std::vector<uint64_t> query_words;
  if (by_id) {
    const BinaryCodeMatrix source =
        f.queries.empty() ? index : ReadCodeFile(f.queries);
    const size_t pos = source.Find(f.query_id);
    if (pos == source.count()) {
      throw FormatError(FormatErrc::kInvariantViolation,
                        "unknown query id " + std::to_string(f.query_id));
    }
    const CodeRef ref = source.Code(pos);
    if (ref.bits != index.bits) {
      throw ShapeError("query codes and index codes differ in length");
    }
    query_words.assign(ref.words.begin(), ref.words.end());
  } else {
    query_words = ParseBitString(f.code, index.bits);
  }
  const SearchResult result =
      SearchTopK(index, CodeRef{query_words, index.bits}, f.topk);
  std::string manifest_path = f.run_manifest;
  if (manifest_path.empty()) manifest_path = f.index + ".search.run.json";
  Json inputs = {{"index", f.index}};
  if (!f.queries.empty()) inputs["queries"] = f.queries;
  Json config = {{"topk", f.topk}};
  if (by_id) {
    config["query_id"] = f.query_id;
  } else {
    config["code"] = f.code;
  }
  WriteRunManifest(manifest_path, "search", std::move(inputs), Json::object(),
                   std::move(config));
  out << "rank\tid\tdistance\n";
  for (size_t r = 0; r < result.size(); ++r) {
    out << r + 1 << '\t' << result[r].id << '\t' << result[r].distance << '\n';
  }
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Multi-modal gated-fusion hashing: train, encode, search, "
               "evaluate"};
  app.name("mmhash");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic split");
  synth_cmd->add_option("--classes", synth.classes, "Number of classes")
      ->capture_default_str()
      ->check(CLI::Range(2u, 1u << 20));
  synth_cmd->add_option("--per-class", synth.per_class, "Samples per class")
      ->capture_default_str()
      ->check(CLI::Range(2u, 1u << 24));
  synth_cmd->add_option("--dims", synth.dims, "Per-modality dims")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output path prefix")->required();

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train a hashing model");
  train_cmd->add_option("--manifest", train.manifest, "Split manifest")
      ->required();
  train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train.log, "Epoch log (default <out>.log)");
  train_cmd->add_option("--bits", train.config.bits, "Code length")
      ->capture_default_str();
  train_cmd->add_flag("--allow-any-bits", train.config.allow_any_bits,
                      "Allow code lengths other than 16/32/64/128");
  train_cmd->add_option("--epochs", train.config.epochs)
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch-size", train.config.batch_size)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train.config.learning_rate)
      ->capture_default_str();
  train_cmd->add_option("--lambda-quant", train.config.lambda_quant)
      ->capture_default_str();
  train_cmd->add_option("--optimizer", train.optimizer)
      ->capture_default_str()
      ->check(CLI::IsMember({"adam", "sgd"}));
  train_cmd->add_option("--beta1", train.config.beta1)->capture_default_str();
  train_cmd->add_option("--beta2", train.config.beta2)->capture_default_str();
  train_cmd->add_option("--epsilon", train.config.epsilon)
      ->capture_default_str();
  train_cmd->add_option("--seed", train.config.seed)->capture_default_str();
  train_cmd->add_flag("--no-normalize", train.no_normalize,
                      "Skip per-modality L2 normalization");

  EncodeFlags encode;
  auto* encode_cmd =
      app.add_subcommand("encode", "Encode an EMBX file to binary codes");
  encode_cmd->add_option("--checkpoint", encode.checkpoint)->required();
  encode_cmd->add_option("--input", encode.input, "EMBX file")->required();
  encode_cmd->add_option("--out", encode.out, "Code file")->required();

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "mAP of query vs retrieval codes");
  eval_cmd->add_option("--manifest", eval.manifest, "Split manifest")
      ->required();
  eval_cmd->add_option("--query-codes", eval.query_codes)->required();
  eval_cmd->add_option("--retrieval-codes", eval.retrieval_codes)->required();
  eval_cmd->add_option("--out", eval.out, "Write the report here as well");
  eval_cmd->add_option("--run-manifest", eval.run_manifest);

  SearchFlags search;
  auto* search_cmd = app.add_subcommand("search", "Top-k Hamming neighbors");
  search_cmd->add_option("--index", search.index, "Code file to search")
      ->required();
  auto* id_opt = search_cmd->add_option("--query-id", search.query_id);
  auto* code_opt = search_cmd->add_option(
      "--code", search.code, "Raw code as a 0/1 string, bit 0 first");
  id_opt->excludes(code_opt);
  search_cmd->add_option("--queries", search.queries,
                         "Code file holding --query-id (default: the index)")
      ->needs(id_opt);
  search_cmd->add_option("--topk", search.topk)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--run-manifest", search.run_manifest);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("mmhash");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) {
      RunSynth(synth, out);
    } else if (*train_cmd) {
      RunTrain(train, out);
    } else if (*encode_cmd) {
      RunEncode(encode, out);
    } else if (*eval_cmd) {
      RunEval(eval, out);
    } else if (*search_cmd) {
      if (id_opt->count() == 0 && code_opt->count() == 0) {
        throw ArgumentError("search needs --query-id or --code");
      }
      RunSearch(search, id_opt->count() > 0, out);
    }
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    // FormatError, EvaluationError and I/O problems.
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace mmhash::cli
