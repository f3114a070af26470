#include "wavecluster/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "wavecluster/error.hpp"
#include "wavecluster/random.hpp"

namespace wavecluster {

std::string to_string(Pipeline p) { return p == Pipeline::Features ? "features" : "spectrum"; }

Pipeline pipeline_from_string(const std::string& s) {
    if (s == "features") return Pipeline::Features;
    if (s == "spectrum") return Pipeline::Spectrum;
    throw InvalidArgument("pipeline: unknown value '" + s + "' (expected features or spectrum)");
}

void RunConfig::validate() const {
    if (measure && pipeline != Pipeline::Spectrum)
        throw InvalidArgument("measure: only valid with pipeline=spectrum");
    if (measure && (*measure == Measure::EuclidFeatures || *measure == Measure::EuclidRaw) &&
        pipeline == Pipeline::Spectrum)
        throw InvalidArgument("measure: the spectrum pipeline takes wer or mca");
    if (features == FeatureKind::RC)
        throw InvalidArgument("features: clustering uses ac or logit-rc");
    if (octave_min >= octave_max) throw InvalidArgument("omin: must be smaller than omax");
    if (voices < 1) throw InvalidArgument("voices: must be at least 1");
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta: must lie in (0, 1]");
    if (k && *k < 1) throw InvalidArgument("k: must be at least 1");
    if (k_max < 2) throw InvalidArgument("kmax: must be at least 2");
    if (select_k_max < 2) throw InvalidArgument("select_kmax: must be at least 2");
    if (restarts < 1) throw InvalidArgument("restarts: must be at least 1");
    if (threads < 1) throw InvalidArgument("threads: must be at least 1");
    if (replicates < 1) throw InvalidArgument("replicates: must be at least 1");
    if (penalty < 0.0) throw InvalidArgument("penalty: must be nonnegative");
    if (!(screen_quantile >= 0.0 && screen_quantile <= 1.0))
        throw InvalidArgument("screen_quantile: must lie in [0, 1]");
    if (levels && (*levels < 1 || *levels > 20)) throw InvalidArgument("levels: must lie in [1, 20]");
    if (delta < 2) throw InvalidArgument("delta: must be at least 2");
    WaveletFilter::by_name(wavelet);
}

nlohmann::json RunConfig::to_json(bool include_paths) const {
    nlohmann::json j;
    j["pipeline"] = to_string(pipeline);
    j["features"] = features == FeatureKind::AC ? "ac" : "logit-rc";
    j["measure"] = measure ? nlohmann::json(to_string(*measure)) : nlohmann::json(nullptr);
    j["wavelet"] = wavelet;
    j["omin"] = octave_min;
    j["omax"] = octave_max;
    j["voices"] = voices;
    j["omega0"] = omega0;
    j["theta"] = theta;
    j["k"] = k ? nlohmann::json(*k) : nlohmann::json(nullptr);
    j["kmax"] = k_max;
    j["select_kmax"] = select_k_max;
    j["select"] = select;
    j["screen_quantile"] = screen_quantile;
    j["penalty"] = penalty;
    j["restarts"] = restarts;
    j["seed"] = seed;
    j["levels"] = levels ? nlohmann::json(*levels) : nlohmann::json(nullptr);
    j["delta"] = delta;
    j["replicates"] = replicates;
    if (include_paths) {
        j["threads"] = threads;
        j["input"] = input;
        j["output"] = output;
        j["labels"] = labels;
        j["partition"] = partition;
    }
    return j;
}

void RunConfig::merge_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("config: top level must be a JSON object");
    auto field = [&](const char* key, auto&& apply) {
        auto it = j.find(key);
        if (it == j.end()) return;
        try {
            apply(*it);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument(std::string(key) + ": " + e.what());
        }
    };
    static const std::vector<std::string> known = {
        "pipeline", "features", "measure", "wavelet", "omin", "omax", "voices", "omega0", "theta",
        "k", "kmax", "select_kmax", "select", "screen_quantile", "penalty", "restarts", "seed",
        "threads", "levels", "delta", "replicates", "input", "output", "labels", "partition"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw InvalidArgument(key + ": unknown configuration key");

    field("pipeline", [&](const auto& v) { pipeline = pipeline_from_string(v.template get<std::string>()); });
    field("features", [&](const auto& v) { features = feature_kind_from_string(v.template get<std::string>()); });
    field("measure", [&](const auto& v) {
        if (v.is_null()) measure.reset();
        else measure = measure_from_string(v.template get<std::string>());
    });
    field("wavelet", [&](const auto& v) { wavelet = v.template get<std::string>(); });
    field("omin", [&](const auto& v) { octave_min = v.template get<int>(); });
    field("omax", [&](const auto& v) { octave_max = v.template get<int>(); });
    field("voices", [&](const auto& v) { voices = v.template get<int>(); });
    field("omega0", [&](const auto& v) { omega0 = v.template get<double>(); });
    field("theta", [&](const auto& v) { theta = v.template get<double>(); });
    field("k", [&](const auto& v) {
        if (v.is_null()) k.reset();
        else k = v.template get<int>();
    });
    field("kmax", [&](const auto& v) { k_max = v.template get<int>(); });
    field("select_kmax", [&](const auto& v) { select_k_max = v.template get<int>(); });
    field("select", [&](const auto& v) { select = v.template get<bool>(); });
    field("screen_quantile", [&](const auto& v) { screen_quantile = v.template get<double>(); });
    field("penalty", [&](const auto& v) { penalty = v.template get<double>(); });
    field("restarts", [&](const auto& v) { restarts = v.template get<int>(); });
    field("seed", [&](const auto& v) { seed = v.template get<std::uint64_t>(); });
    field("threads", [&](const auto& v) { threads = v.template get<int>(); });
    field("levels", [&](const auto& v) {
        if (v.is_null()) levels.reset();
        else levels = v.template get<unsigned>();
    });
    field("delta", [&](const auto& v) { delta = v.template get<std::size_t>(); });
    field("replicates", [&](const auto& v) { replicates = v.template get<int>(); });
    field("input", [&](const auto& v) { input = v.template get<std::string>(); });
    field("output", [&](const auto& v) { output = v.template get<std::string>(); });
    field("labels", [&](const auto& v) { labels = v.template get<std::string>(); });
    field("partition", [&](const auto& v) { partition = v.template get<std::string>(); });
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.merge_json(j);
    return c;
}

DissimilarityConfig RunConfig::dissimilarity_config() const {
    DissimilarityConfig d;
    d.grid = make_scale_grid(octave_min, octave_max, voices);
    d.cwt.omega0 = omega0;
    d.theta = theta;
    d.filter = WaveletFilter::by_name(wavelet);
    d.feature_kind = features;
    return d;
}

FunctionalDataset prepare_dyadic(const FunctionalDataset& dataset, std::optional<unsigned> levels) {
    dataset.validate();
    if (!levels) {
        if (!is_power_of_two(dataset.length()))
            throw InvalidArgument("curve length " + std::to_string(dataset.length()) +
                                  " is not a power of two; pass --levels to resample");
        return dataset;
    }
    FunctionalDataset out = dataset;
    for (auto& curve : out.curves) curve = resample_dyadic(curve, *levels).values;
    return out;
}

FeaturePipelineResult run_feature_pipeline(const FunctionalDataset& dataset, const RunConfig& config) {
    const auto dyadic = prepare_dyadic(dataset, config.levels);
    FeaturePipelineResult out;
    out.features = extract_features(dyadic.curves, WaveletFilter::by_name(config.wavelet), config.features);

    const Eigen::Index cols = out.features.cols();
    out.used_columns.resize(static_cast<std::size_t>(cols));
    std::iota(out.used_columns.begin(), out.used_columns.end(), 0);
    if (config.select) {
        SelectionOptions opt;
        opt.screen_quantile = config.screen_quantile;
        opt.penalty = config.penalty;
        opt.seed = derive_seed(config.seed, "select");
        const int k_max = std::min<int>(config.select_k_max, static_cast<int>(out.features.rows()));
        out.selection = select_features_stable(out.features.values, k_max, opt);
        if (!out.selection.selected.empty()) out.used_columns = out.selection.selected;
    }
    Eigen::MatrixXd chosen(out.features.rows(), static_cast<Eigen::Index>(out.used_columns.size()));
    for (std::size_t c = 0; c < out.used_columns.size(); ++c)
        chosen.col(static_cast<Eigen::Index>(c)) = out.features.values.col(out.used_columns[c]);
    out.design = range_normalize(chosen);

    KMeansOptions km;
    km.restarts = config.restarts;
    km.seed = derive_seed(config.seed, "cluster");
    int k = 0;
    if (config.k) {
        k = *config.k;
    } else {
        KMeansOptions jump_opt = km;
        jump_opt.seed = derive_seed(config.seed, "choose-k");
        out.jump = choose_k_by_jump(out.design, std::min<int>(config.k_max, static_cast<int>(out.design.rows())), jump_opt);
        k = out.jump->k;
    }
    out.partition = kmeans(out.design, k, km);
    return out;
}

SpectrumPipelineResult run_spectrum_pipeline(const FunctionalDataset& dataset, const RunConfig& config) {
    if (!config.k) throw InvalidArgument("k: the spectrum pipeline needs an explicit cluster count");
    SpectrumPipelineResult out;
    // The CWT takes any length; resample only when levels are requested.
    const auto curves = config.levels ? prepare_dyadic(dataset, config.levels) : dataset;
    out.dissimilarity = build_dissimilarity_matrix(curves, config.effective_measure(), config.dissimilarity_config());
    out.partition = pam(out.dissimilarity, *config.k, derive_seed(config.seed, "pam"));
    return out;
}

std::uint64_t replicate_seed(std::uint64_t seed, int replicate) {
    return derive_seed(seed, "replicate", static_cast<std::uint64_t>(replicate));
}

ReplicateOutcome run_benchmark_replicate(std::uint64_t seed, const RunConfig& config) {
    const auto bench = gen_benchmark(seed);
    RunConfig fc = config;
    fc.pipeline = Pipeline::Features;
    fc.features = FeatureKind::LogitRC;
    fc.measure.reset();
    fc.levels.reset();
    fc.select = true;
    fc.k = 3;
    fc.seed = derive_seed(seed, "features");
    const auto features = run_feature_pipeline(bench.dataset, fc);

    ReplicateOutcome out;
    out.selected = features.selection.selected;
    const auto fv = validate_partition(features.partition.labels, bench.labels);
    out.feature_errors = fv.error.count;
    out.feature_ari = fv.rand.adjusted;

    Eigen::MatrixXd raw(static_cast<Eigen::Index>(bench.dataset.size()),
                        static_cast<Eigen::Index>(bench.dataset.length()));
    for (std::size_t i = 0; i < bench.dataset.size(); ++i)
        raw.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(bench.dataset.curves[i].data(),
                                                 static_cast<Eigen::Index>(bench.dataset.length()));
    KMeansOptions km;
    km.restarts = config.restarts;
    km.seed = derive_seed(seed, "raw");
    const auto raw_partition = kmeans(raw, 3, km);
    const auto rv = validate_partition(raw_partition.labels, bench.labels);
    out.raw_errors = rv.error.count;
    out.raw_ari = rv.rand.adjusted;
    return out;
}

PairedTest paired_t_test_less(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("paired test needs two equal samples of size >= 2");
    const auto n = static_cast<double>(a.size());
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : diff) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    PairedTest out;
    out.mean_difference = mean;
    if (!(sd > 0.0)) {
        out.t_statistic = mean < 0.0 ? -INFINITY : (mean > 0.0 ? INFINITY : 0.0);
        out.p_value = mean < 0.0 ? 0.0 : 1.0;
        return out;
    }
    out.t_statistic = mean / (sd / std::sqrt(n));
    boost::math::students_t dist(n - 1.0);
    out.p_value = boost::math::cdf(dist, out.t_statistic);
    return out;
}

}  // namespace wavecluster
