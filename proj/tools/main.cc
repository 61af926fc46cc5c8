// Copyright 2026 The AdStrength Authors.
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

// adstrength: command-line driver for the whole pipeline.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "adstrength/analytics.h"
#include "adstrength/annindex.h"
#include "adstrength/anonymize.h"
#include "adstrength/corpus.h"
#include "adstrength/ctrmodel.h"
#include "adstrength/embed.h"
#include "adstrength/error.h"
#include "adstrength/metrics.h"
#include "adstrength/pipeline.h"
#include "adstrength/service.h"
#include "adstrength/simpairs.h"
#include "adstrength/synth.h"
#include "adstrength/tsicore.h"

namespace as = adstrength;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

void Emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) as::Fail(as::ErrorKind::kIo, "cannot write " + out_path);
  out << text;
}

void EmitJson(const json& doc, const std::string& out_path = "") {
  Emit(doc.dump(2) + "\n", out_path);
}

template <typename T>
std::vector<T> ParseList(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream field(item);
    T value;
    if (!(field >> value) || !(field >> std::ws).eof()) {
      as::Fail(as::ErrorKind::kInvalidArgument, std::string("bad ") + what + " list '" + text + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) as::Fail(as::ErrorKind::kInvalidArgument, std::string("empty ") + what + " list");
  return out;
}

struct PoolFlags {
  std::string path;
  size_t top_publishers = 13;

  void Add(CLI::App* app) {
    app->add_option("--pool", path, "Ad pool (JSON Lines)")->required()->check(CLI::ExistingFile);
    app->add_option("--top-publishers", top_publishers,
                    "Publishers kept by impression volume; the rest become OTHER");
  }
  as::AdPool Load() const { return as::LoadPool(path, top_publishers); }
};

struct VocabFlag {
  std::string path;
  void Add(CLI::App* app) {
    app->add_option("--vocab", path, "Vocabulary JSON")->check(CLI::ExistingFile);
  }
  // Falls back to a vocabulary over the whole pool when no file is given.
  std::shared_ptr<const as::Vocab> Get(const as::AdPool* pool) const {
    if (!path.empty()) return std::make_shared<const as::Vocab>(as::Vocab::Load(path));
    if (pool == nullptr) as::Fail(as::ErrorKind::kInvalidArgument, "--vocab is required");
    std::vector<std::string> ids;
    for (const auto& ad : pool->ads()) ids.push_back(ad.ad_id);
    return std::make_shared<const as::Vocab>(as::BuildVocab(*pool, ids));
  }
};

struct EmbedFlags {
  std::string kind = "hashed";
  size_t dim = 128;
  uint64_t seed = 7;
  std::string endpoint;
  int timeout_ms = 200;

  void Add(CLI::App* app) {
    app->add_option("--embedder", kind, "hashed | tfidf | http")
        ->check(CLI::IsMember({"hashed", "tfidf", "http"}));
    app->add_option("--dim", dim, "Embedding dimension (hashed, http)");
    app->add_option("--embed-seed", seed, "Seed of the hashed projection");
    app->add_option("--embed-endpoint", endpoint, "External embedding service URL");
    app->add_option("--embed-timeout-ms", timeout_ms, "External embedding timeout");
  }
  std::shared_ptr<const as::EmbeddingProvider> Make(const VocabFlag& vocab,
                                                    const as::AdPool* pool) const {
    if (kind == "hashed") return std::make_shared<const as::HashedProjectionProvider>(dim, seed);
    if (kind == "tfidf") return std::make_shared<const as::TfidfProvider>(vocab.Get(pool));
    if (endpoint.empty()) as::Fail(as::ErrorKind::kInvalidArgument, "--embed-endpoint is required");
    as::HttpClientOptions options;
    options.timeout = std::chrono::milliseconds(timeout_ms);
    return std::make_shared<const as::ExternalEmbeddingClient>(endpoint, dim, options);
  }
};

struct PctrFlags {
  std::string model;
  std::string table;
  std::string endpoint;
  std::optional<double> constant;
  int timeout_ms = 200;

  void Add(CLI::App* app) {
    app->add_option("--model", model, "Trained CTR model JSON (needs --vocab)")
        ->check(CLI::ExistingFile);
    app->add_option("--pctr-table", table, "Fixture pCTR table JSON")->check(CLI::ExistingFile);
    app->add_option("--pctr-endpoint", endpoint, "External pCTR service URL");
    app->add_option("--pctr-constant", constant, "Constant pCTR");
    app->add_option("--pctr-timeout-ms", timeout_ms, "External pCTR timeout");
  }
  std::shared_ptr<const as::PctrProvider> Make(const VocabFlag& vocab) const {
    const int given = !model.empty() + !table.empty() + !endpoint.empty() + constant.has_value();
    if (given != 1) {
      as::Fail(as::ErrorKind::kInvalidArgument,
               "exactly one of --model, --pctr-table, --pctr-endpoint, --pctr-constant is required");
    }
    if (!model.empty()) {
      return std::make_shared<const as::LinearCtrModel>(
          as::LinearCtrModel::Load(model, vocab.Get(nullptr)));
    }
    if (!table.empty()) {
      return std::make_shared<const as::TablePctrProvider>(as::TablePctrProvider::Load(table));
    }
    if (constant) return std::make_shared<const as::ConstantPctrProvider>(*constant);
    as::HttpClientOptions options;
    options.timeout = std::chrono::milliseconds(timeout_ms);
    return std::make_shared<const as::ExternalPctrClient>(endpoint, options);
  }
};

struct IndexFlags {
  std::string path;
  as::IndexParams params;

  void Add(CLI::App* app, bool allow_load) {
    if (allow_load) {
      app->add_option("--index", path, "Prebuilt index file")->check(CLI::ExistingFile);
    }
    app->add_option("--nlist", params.nlist, "Inverted lists (0 = sqrt n)");
    app->add_option("--nprobe", params.nprobe, "Lists probed per query (0 = auto)");
    app->add_option("--index-seed", params.build_seed, "k-means seed");
  }
  as::AdIndex Get(const as::AdPool& pool, const as::EmbeddingProvider& embedder,
                  const as::PctrProvider& pctr) const {
    if (!path.empty()) return as::AdIndex::Load(path);
    return as::AdIndex::Build(pool, embedder, pctr, params);
  }
};

struct TsiFlags {
  as::TsiConfig config;
  void Add(CLI::App* app) {
    app->add_option("--k", config.k, "Neighbors retrieved");
    app->add_option("--delta", config.delta, "Relative lift threshold");
    app->add_option("--min-sim", config.min_sim, "Minimum cosine similarity");
  }
};

as::BlockList LoadBlockList(const std::string& path) {
  return path.empty() ? as::BlockList({}) : as::BlockList::Load(path);
}

std::string Fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string Percent(double lift) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.1f%%", 100.0 * lift);
  return buf;
}

std::set<std::string> Advertisers(const as::AdPool& pool, const std::vector<std::string>& ids) {
  std::set<std::string> out;
  for (const auto& id : ids) out.insert(pool.Get(id).advertiser_id);
  return out;
}

size_t Overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

std::atomic<as::HttpFrontend*> g_frontend{nullptr};

void HandleSignal(int) {
  if (auto* frontend = g_frontend.load()) frontend->Stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ad text strength indicator: CTR models, retrieval, TSI scoring and service"};
  app.require_subcommand(1);
  std::function<void()> run;

  // synth-corpus
  as::SynthConfig synth;
  std::string synth_out, synth_brands;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "Generate a seeded synthetic ad pool");
  synth_cmd->add_option("--ads", synth.ads, "Number of ads");
  synth_cmd->add_option("--categories", synth.categories, "Number of categories (<= 20)");
  synth_cmd->add_option("--advertisers", synth.advertisers, "Number of advertisers");
  synth_cmd->add_option("--publishers", synth.publishers, "Number of publishers");
  synth_cmd->add_option("--topic-words", synth.topic_words, "Topical words per category");
  synth_cmd->add_option("--base-ctr", synth.base_ctr, "Baseline CTR");
  synth_cmd->add_option("--token-effect-sd", synth.token_effect_sd, "Spread of per-token logit effects");
  synth_cmd->add_option("--zero-impression-rate", synth.zero_impression_rate,
                        "Fraction of ads with no impressions");
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("--out", synth_out, "Output pool (default stdout)");
  synth_cmd->add_option("--brands-out", synth_brands, "Write advertiser brand names (block list)");
  synth_cmd->callback([&] {
    run = [&] {
      const auto corpus = as::GenerateCorpus(synth);
      std::ostringstream pool;
      as::WritePool(pool, corpus.ads);
      Emit(pool.str(), synth_out);
      if (!synth_brands.empty()) {
        std::string lines;
        for (const auto& b : corpus.brands) lines += b + "\n";
        Emit(lines, synth_brands);
      }
    };
  });

  // ingest
  PoolFlags ingest_pool;
  std::string ingest_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a pool and summarize it");
  ingest_pool.Add(ingest_cmd);
  ingest_cmd->add_option("--out", ingest_out, "Write the normalized pool");
  ingest_cmd->callback([&] {
    run = [&] {
      const auto pool = ingest_pool.Load();
      std::set<std::string> advertisers, campaigns, adgroups, categories;
      int64_t impressions = 0, clicks = 0;
      for (const auto& ad : pool.ads()) {
        advertisers.insert(ad.advertiser_id);
        campaigns.insert(ad.campaign_id);
        adgroups.insert(ad.adgroup_id);
        categories.insert(ad.category);
        impressions += ad.impressions;
        clicks += ad.clicks;
      }
      if (!ingest_out.empty()) {
        std::ostringstream out;
        as::WritePool(out, pool.ads());
        Emit(out.str(), ingest_out);
      }
      EmitJson({{"ads", pool.size()},
                {"advertisers", advertisers.size()},
                {"campaigns", campaigns.size()},
                {"adgroups", adgroups.size()},
                {"categories", categories.size()},
                {"impressions", impressions},
                {"clicks", clicks},
                {"publisher_whitelist", pool.publisher_whitelist()}});
    };
  });

  // split
  PoolFlags split_pool;
  std::string split_mode = "warm", split_fractions = "0.8,0.06,0.14", split_out;
  uint64_t split_seed = 0;
  auto* split_cmd = app.add_subcommand("split", "Warm or cold train/validation/test split");
  split_pool.Add(split_cmd);
  split_cmd->add_option("--mode", split_mode, "warm | cold")->check(CLI::IsMember({"warm", "cold"}));
  split_cmd->add_option("--fractions", split_fractions, "train,validation,test");
  split_cmd->add_option("--seed", split_seed, "Seed");
  split_cmd->add_option("--out", split_out, "Split JSON")->required();
  split_cmd->callback([&] {
    run = [&] {
      const auto f = ParseList<double>(split_fractions, "fraction");
      if (f.size() != 3) as::Fail(as::ErrorKind::kInvalidArgument, "--fractions needs 3 values");
      const auto pool = split_pool.Load();
      const auto split =
          as::MakeSplit(pool, {f[0], f[1], f[2]}, as::ParseSplitMode(split_mode), split_seed);
      split.Save(split_out);
      const auto tr = Advertisers(pool, split.train);
      const auto va = Advertisers(pool, split.validation);
      const auto te = Advertisers(pool, split.test);
      size_t shared = 0;
      std::set<std::string> all = tr;
      all.insert(va.begin(), va.end());
      all.insert(te.begin(), te.end());
      for (const auto& adv : all) shared += tr.count(adv) + va.count(adv) + te.count(adv) > 1;
      EmitJson({{"mode", split_mode},
                {"train", split.train.size()},
                {"validation", split.validation.size()},
                {"test", split.test.size()},
                {"shared_advertisers", shared}});
    };
  });

  // train-ctr
  PoolFlags train_pool;
  std::string train_split, train_variant = "nblr", train_features = "counts", train_out,
                           train_vocab_out;
  as::TrainConfig train_config;
  uint32_t train_min_df = as::Vocab::kDefaultMinDf;
  size_t train_max_pub = 13;
  auto* train_cmd = app.add_subcommand("train-ctr", "Train an LR or NBLR text-to-CTR model");
  train_pool.Add(train_cmd);
  train_cmd->add_option("--split", train_split, "Split JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--variant", train_variant, "lr | nblr")->check(CLI::IsMember({"lr", "nblr"}));
  train_cmd->add_option("--features", train_features, "counts | tfidf")
      ->check(CLI::IsMember({"counts", "tfidf"}));
  train_cmd->add_option("--epochs", train_config.epochs, "Full-batch epochs");
  train_cmd->add_option("--learning-rate", train_config.learning_rate, "Step size");
  train_cmd->add_option("--l2", train_config.l2_penalty, "L2 penalty on non-bias weights");
  train_cmd->add_option("--nb-alpha", train_config.nb_alpha, "Naive Bayes smoothing");
  train_cmd->add_option("--min-df", train_min_df, "Minimum document frequency");
  train_cmd->add_option("--max-pub", train_max_pub, "Publisher one-hot columns (plus OTHER)");
  train_cmd->add_option("--seed", train_config.seed, "Seed");
  train_cmd->add_option("--out", train_out, "Model JSON")->required();
  train_cmd->add_option("--vocab-out", train_vocab_out, "Vocabulary JSON")->required();
  train_cmd->callback([&] {
    run = [&] {
      train_config.feature_scheme = as::ParseFeatureScheme(train_features);
      const auto pool = train_pool.Load();
      const auto split = as::Split::Load(train_split);
      const auto result = as::RunCtrExperiment(pool, split, as::ParseModelVariant(train_variant),
                                               train_config, train_min_df, train_max_pub);
      result.vocab->Save(train_vocab_out);
      result.model->Save(train_out);
      EmitJson({{"variant", train_variant},
                {"vocab_size", result.vocab->size()},
                {"final_loss", result.model->loss_history().back()},
                {"test", result.test.ToJson()}});
    };
  });

  // eval-ctr
  PoolFlags eval_pool;
  std::string eval_split, eval_model, eval_vocab, eval_features = "counts";
  as::TrainConfig eval_config;
  size_t eval_max_pub = 13;
  auto* eval_cmd = app.add_subcommand(
      "eval-ctr", "CTR metrics on the test split (trains LR and NBLR unless --model is given)");
  eval_pool.Add(eval_cmd);
  uint64_t eval_seed = 0;
  eval_cmd->add_option("--split", eval_split, "Split JSON, or warm | cold to split in place")
      ->required();
  eval_cmd->add_option("--seed", eval_seed, "Seed of an in-place split");
  eval_cmd->add_option("--model", eval_model, "Evaluate this model")->check(CLI::ExistingFile);
  eval_cmd->add_option("--vocab", eval_vocab, "Vocabulary of --model")->check(CLI::ExistingFile);
  eval_cmd->add_option("--features", eval_features, "counts | tfidf")
      ->check(CLI::IsMember({"counts", "tfidf"}));
  eval_cmd->add_option("--epochs", eval_config.epochs, "Full-batch epochs");
  eval_cmd->add_option("--learning-rate", eval_config.learning_rate, "Step size");
  eval_cmd->add_option("--l2", eval_config.l2_penalty, "L2 penalty");
  eval_cmd->add_option("--max-pub", eval_max_pub, "Publisher one-hot columns (plus OTHER)");
  eval_cmd->callback([&] {
    run = [&] {
      const auto pool = eval_pool.Load();
      const auto split = (eval_split == "warm" || eval_split == "cold")
                             ? as::MakeSplit(pool, {}, as::ParseSplitMode(eval_split), eval_seed)
                             : as::Split::Load(eval_split);
      const size_t overlap = Overlap(Advertisers(pool, split.train), Advertisers(pool, split.test));
      if (split.mode == as::SplitMode::kCold && overlap != 0) {
        as::Fail(as::ErrorKind::kFailedPrecondition, "cold split shares advertisers with test");
      }
      json rows = json::array();
      if (!eval_model.empty()) {
        if (eval_vocab.empty()) as::Fail(as::ErrorKind::kInvalidArgument, "--model needs --vocab");
        auto vocab = std::make_shared<const as::Vocab>(as::Vocab::Load(eval_vocab));
        const auto model = as::LinearCtrModel::Load(eval_model, vocab);
        json row = as::EvaluateCtr(as::ScoreAds(pool, split.test, model)).ToJson();
        row["model"] = std::string(as::ModelVariantName(model.variant()));
        rows.push_back(row);
      } else {
        eval_config.feature_scheme = as::ParseFeatureScheme(eval_features);
        for (auto variant : {as::ModelVariant::kLr, as::ModelVariant::kNblr}) {
          json row = as::RunCtrExperiment(pool, split, variant, eval_config,
                                          as::Vocab::kDefaultMinDf, eval_max_pub)
                         .test.ToJson();
          row["model"] = std::string(as::ModelVariantName(variant));
          rows.push_back(row);
        }
      }
      EmitJson({{"split", std::string(as::SplitModeName(split.mode))},
                {"train_test_advertiser_overlap", overlap},
                {"rows", rows}});
    };
  });

  // gen-pairs
  PoolFlags pairs_pool;
  std::string pairs_strategy = "advertiser-cat", pairs_out;
  as::PairOptions pair_options;
  auto* pairs_cmd = app.add_subcommand("gen-pairs", "Weakly labeled similarity pairs");
  pairs_pool.Add(pairs_cmd);
  pairs_cmd->add_option("--strategy", pairs_strategy, "advertiser-cat | campaign-cat | adgroup-cat")
      ->check(CLI::IsMember({"advertiser-cat", "campaign-cat", "adgroup-cat"}));
  pairs_cmd->add_option("--neg-ratio", pair_options.neg_ratio, "Negatives per positive");
  pairs_cmd->add_option("--cap", pair_options.positive_cap_per_bucket, "Positive cap per bucket");
  pairs_cmd->add_option("--seed", pair_options.seed, "Seed");
  pairs_cmd->add_option("--out", pairs_out, "Pairs JSON Lines")->required();
  pairs_cmd->callback([&] {
    run = [&] {
      pair_options.strategy = as::ParsePairStrategy(pairs_strategy);
      const auto pool = pairs_pool.Load();
      const auto pairs = as::GeneratePairs(pool, pair_options);
      as::ExportPairs(pairs, pool, pairs_out);
      EmitJson({{"strategy", pairs_strategy},
                {"positives", pairs.positives()},
                {"negatives", pairs.negatives()}});
    };
  });

  // eval-pairs
  std::string eval_pairs_path;
  VocabFlag eval_pairs_vocab;
  EmbedFlags eval_pairs_embed;
  auto* eval_pairs_cmd = app.add_subcommand("eval-pairs", "Cosine-MSE loss of an embedder on pairs");
  eval_pairs_cmd->add_option("--pairs", eval_pairs_path, "Pairs JSON Lines")
      ->required()
      ->check(CLI::ExistingFile);
  eval_pairs_vocab.Add(eval_pairs_cmd);
  eval_pairs_embed.Add(eval_pairs_cmd);
  eval_pairs_cmd->callback([&] {
    run = [&] {
      const auto pairs = as::ImportPairs(eval_pairs_path);
      const auto embedder = eval_pairs_embed.Make(eval_pairs_vocab, nullptr);
      const auto loss = as::CosineMseLoss(pairs, *embedder);
      EmitJson({{"pairs", pairs.size()}, {"mean_loss", loss.mean}});
    };
  });

  // build-index
  PoolFlags index_pool;
  VocabFlag index_vocab;
  EmbedFlags index_embed;
  PctrFlags index_pctr;
  IndexFlags index_flags;
  std::string index_out;
  auto* index_cmd = app.add_subcommand("build-index", "Embed the pool and build the ANN index");
  index_pool.Add(index_cmd);
  index_vocab.Add(index_cmd);
  index_embed.Add(index_cmd);
  index_pctr.Add(index_cmd);
  index_flags.Add(index_cmd, false);
  index_cmd->add_option("--out", index_out, "Index file")->required();
  index_cmd->callback([&] {
    run = [&] {
      const auto pool = index_pool.Load();
      const auto embedder = index_embed.Make(index_vocab, &pool);
      const auto pctr = index_pctr.Make(index_vocab);
      const auto index = index_flags.Get(pool, *embedder, *pctr);
      index.Save(index_out);
      EmitJson({{"size", index.size()},
                {"dimension", index.dimension()},
                {"nlist", index.nlist()},
                {"nprobe", index.nprobe()},
                {"digest", index.Digest()}});
    };
  });

  // eval-retrieval
  PoolFlags retr_pool;
  VocabFlag retr_vocab;
  EmbedFlags retr_embed;
  IndexFlags retr_index;
  std::string retr_split, retr_k = "1,5,10", retr_notions = "adgroup,campaign,advertiser,category";
  bool retr_approx = false;
  auto* retr_cmd = app.add_subcommand("eval-retrieval", "Precision@k per similarity notion");
  retr_pool.Add(retr_cmd);
  retr_vocab.Add(retr_cmd);
  retr_embed.Add(retr_cmd);
  retr_index.Add(retr_cmd, false);
  retr_cmd->add_option("--split", retr_split, "Split JSON")->required()->check(CLI::ExistingFile);
  retr_cmd->add_option("--k", retr_k, "Comma-separated k values");
  retr_cmd->add_option("--notions", retr_notions, "Comma-separated notions");
  retr_cmd->add_flag("--approximate", retr_approx, "Use the inverted-file query");
  retr_cmd->callback([&] {
    run = [&] {
      const auto pool = retr_pool.Load();
      const auto split = as::Split::Load(retr_split);
      const auto embedder = retr_embed.Make(retr_vocab, &pool);
      std::vector<as::SimilarityNotion> notions;
      std::stringstream in(retr_notions);
      for (std::string n; std::getline(in, n, ',');) notions.push_back(as::ParseSimilarityNotion(n));
      const auto k_list = ParseList<size_t>(retr_k, "k");
      as::RetrievalEvalOptions options{retr_approx, retr_index.params};
      EmitJson(as::EvaluateStrategyTable(pool, split, *embedder, notions, k_list, options).ToJson());
    };
  });

  // tsi
  PoolFlags tsi_pool;
  VocabFlag tsi_vocab;
  EmbedFlags tsi_embed;
  PctrFlags tsi_pctr;
  IndexFlags tsi_index;
  TsiFlags tsi_flags;
  std::string tsi_title, tsi_description, tsi_cta, tsi_publisher, tsi_blocklist, tsi_exclude;
  bool tsi_json = false;
  auto* tsi_cmd = app.add_subcommand("tsi", "Score one ad text and list suggestions");
  tsi_pool.Add(tsi_cmd);
  tsi_vocab.Add(tsi_cmd);
  tsi_embed.Add(tsi_cmd);
  tsi_pctr.Add(tsi_cmd);
  tsi_index.Add(tsi_cmd, true);
  tsi_flags.Add(tsi_cmd);
  tsi_cmd->add_option("--title", tsi_title, "Title");
  tsi_cmd->add_option("--description", tsi_description, "Description");
  tsi_cmd->add_option("--cta", tsi_cta, "Call to action");
  tsi_cmd->add_option("--publisher", tsi_publisher, "Publisher (default OTHER)");
  tsi_cmd->add_option("--blocklist", tsi_blocklist, "Brand block list")->check(CLI::ExistingFile);
  tsi_cmd->add_option("--exclude", tsi_exclude, "Ad id to leave out of the neighbors");
  tsi_cmd->add_flag("--json", tsi_json, "Print JSON instead of text");
  tsi_cmd->callback([&] {
    run = [&] {
      tsi_flags.config.Validate();
      const auto text = as::ComposeAdText(tsi_title, tsi_description, tsi_cta);
      if (text.full_text.empty()) {
        as::Fail(as::ErrorKind::kInvalidArgument, "one of --title, --description, --cta is required");
      }
      const std::string publisher =
          tsi_publisher.empty() ? std::string(as::kOtherPublisher) : tsi_publisher;
      const auto pool = tsi_pool.Load();
      const auto embedder = tsi_embed.Make(tsi_vocab, &pool);
      const auto pctr = tsi_pctr.Make(tsi_vocab);
      const auto index = tsi_index.Get(pool, *embedder, *pctr);
      const auto blocklist = LoadBlockList(tsi_blocklist);
      as::QueryOptions query{tsi_flags.config.k, tsi_flags.config.min_sim, std::nullopt};
      if (!tsi_exclude.empty()) query.exclude = tsi_exclude;
      const double input = pctr->Predict(text, publisher);
      auto neighbors = index.QueryApprox(embedder->Embed(text.full_text), query);
      auto result = as::ScoreTsi(input, neighbors, tsi_flags.config);
      for (auto& s : result.suggestions) {
        s.text = as::Anonymize(pool.Get(s.neighbor.ad_id).Text().full_text, blocklist);
      }
      if (tsi_json) {
        json suggestions = json::array();
        for (const auto& s : result.suggestions) {
          suggestions.push_back({{"anonymized_text", s.text},
                                 {"pctr", s.neighbor.pctr},
                                 {"similarity", s.neighbor.similarity},
                                 {"lift", s.lift}});
        }
        EmitJson({{"pctr", input},
                  {"tsi", result.tsi},
                  {"neighbors_considered", result.neighbors.size()},
                  {"suggestions", suggestions}});
        return;
      }
      std::ostringstream out;
      out << "input pCTR: " << Fixed(input, 4) << "\n";
      out << "neighbors (by similarity):";
      for (const auto& n : result.neighbors) out << " " << Fixed(n.pctr, 4);
      out << "\n";
      if (result.median_above) {
        out << "median of better neighbors: " << Fixed(*result.median_above, 4) << " ("
            << Percent((*result.median_above - input) / input) << ")\n";
      } else {
        out << "median of better neighbors: none\n";
      }
      out << "delta: " << Fixed(tsi_flags.config.delta, 2) << "\n";
      out << "TSI: " << result.tsi << (result.tsi == 0 ? " (weak)" : " (strong)") << "\n";
      out << "suggestions:" << (result.suggestions.empty() ? " none" : "") << "\n";
      for (size_t i = 0; i < result.suggestions.size(); ++i) {
        const auto& s = result.suggestions[i];
        out << "  " << (i + 1) << ". pCTR " << Fixed(s.neighbor.pctr, 4) << " ("
            << Percent(s.lift) << ")  " << s.text << "\n";
      }
      Emit(out.str(), "");
    };
  });

  // sweep-delta
  PoolFlags sweep_pool;
  VocabFlag sweep_vocab;
  EmbedFlags sweep_embed;
  PctrFlags sweep_pctr;
  IndexFlags sweep_index;
  TsiFlags sweep_flags;
  std::string sweep_split, sweep_deltas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep-delta", "Recommendation rate as a function of delta");
  sweep_pool.Add(sweep_cmd);
  sweep_vocab.Add(sweep_cmd);
  sweep_embed.Add(sweep_cmd);
  sweep_pctr.Add(sweep_cmd);
  sweep_index.Add(sweep_cmd, true);
  sweep_flags.Add(sweep_cmd);
  sweep_cmd->add_option("--split", sweep_split, "Split JSON (test ads are queried)")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--deltas", sweep_deltas, "Comma-separated deltas");
  sweep_cmd->add_option("--out", sweep_out, "CSV output (default stdout)");
  sweep_cmd->callback([&] {
    run = [&] {
      const auto deltas = ParseList<double>(sweep_deltas, "delta");
      const auto pool = sweep_pool.Load();
      const auto embedder = sweep_embed.Make(sweep_vocab, &pool);
      const auto pctr = sweep_pctr.Make(sweep_vocab);
      const auto index = sweep_index.Get(pool, *embedder, *pctr);
      std::vector<as::Ad> test_ads;
      if (sweep_split.empty()) {
        test_ads = pool.ads();
      } else {
        for (const auto& id : as::Split::Load(sweep_split).test) test_ads.push_back(pool.Get(id));
      }
      const auto curve =
          as::DeltaSweep(test_ads, index, *pctr, *embedder, deltas, sweep_flags.config);
      Emit(as::SweepToCsv(curve), sweep_out);
    };
  });

  // analyze-sessions
  std::string events_path;
  auto* sessions_cmd = app.add_subcommand("analyze-sessions", "Recommendation and adoption rates");
  sessions_cmd->add_option("--events", events_path, "UiEvent JSON Lines")
      ->required()
      ->check(CLI::ExistingFile);
  sessions_cmd->callback([&] {
    run = [&] {
      const auto sessions = as::Sessionize(as::LoadEvents(events_path));
      EmitJson(as::ReportSessions(sessions, as::EnglishStopwords()).ToJson());
    };
  });

  // serve
  std::string serve_config;
  std::optional<int> serve_port;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP scoring service");
  serve_cmd->add_option("--config", serve_config, "Service config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve_port, "Override listen_port");
  serve_cmd->callback([&] {
    run = [&] {
      auto config = as::ServeConfig::Load(serve_config);
      config.ApplyEnv([](const char* name) { return std::getenv(name); });
      if (serve_port) config.listen_port = *serve_port;
      as::TsiService service(config.ToServiceOptions(), as::MakeStateFactory(config));
      as::HttpFrontend frontend(service, config.http_threads);
      const int port = frontend.Bind(config.listen_host, config.listen_port);
      std::cerr << "listening on " << config.listen_host << ":" << port << "\n";
      service.StartRebuild();
      g_frontend.store(&frontend);
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      frontend.Serve();
      g_frontend.store(nullptr);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  try {
    run();
  } catch (const as::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case as::ErrorKind::kInvalidArgument:
      case as::ErrorKind::kParse:
      case as::ErrorKind::kNotFound:
      case as::ErrorKind::kFailedPrecondition:
        return kExitValidation;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
