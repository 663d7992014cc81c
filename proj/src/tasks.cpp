#include "cstab/tasks.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "cstab/hash.hpp"
#include "cstab/rng.hpp"

namespace cstab {

namespace ioi {
constexpr int kNames = 8;
constexpr int kBos = 8, kSep = 9, kTo = 10, kAnd = 11, kPre = 12;
constexpr int kVocab = 13;
constexpr int kTemplates = 3;

std::vector<int> render(int tmpl, int a, int b, int x) {
    switch (tmpl) {
        case 0: return {kBos, a, b, kSep, x, kTo};
        case 1: return {kBos, a, kAnd, b, kSep, x, kTo};
        case 2: return {kBos, kPre, a, b, kSep, x, kTo};
        default: throw Error("toy-ioi: unknown template " + std::to_string(tmpl));
    }
}
// (a, b, x) positions per template
void slots(int tmpl, int& pa, int& pb, int& px) {
    switch (tmpl) {
        case 0: pa = 1; pb = 2; px = 4; return;
        case 1: pa = 1; pb = 3; px = 5; return;
        case 2: pa = 2; pb = 3; px = 5; return;
        default: throw Error("toy-ioi: unknown template " + std::to_string(tmpl));
    }
}
}  // namespace ioi

namespace gt {
constexpr int kYears = 48;
constexpr int kFillers = 8;
constexpr int kFillerBase = 48;
constexpr int kBos = 56, kFrom = 57, kTo = 58;
constexpr int kVocab = 59;
constexpr int kTemplates = 3;
constexpr int kMinStartYear = 1;  // the "01" analogue
constexpr int kYearLo = 2, kYearHi = 46;

std::vector<int> render(int tmpl, int year, int f1, int f2) {
    switch (tmpl) {
        case 0: return {kBos, kFillerBase + f1, kFrom, year, kTo};
        case 1: return {kBos, kFrom, year, kTo};
        case 2: return {kBos, kFillerBase + f1, kFillerBase + f2, kFrom, year, kTo};
        default: throw Error("toy-greater-than: unknown template " + std::to_string(tmpl));
    }
}
int year_slot(int tmpl) {
    switch (tmpl) {
        case 0: return 3;
        case 1: return 2;
        case 2: return 4;
        default: throw Error("toy-greater-than: unknown template " + std::to_string(tmpl));
    }
}
}  // namespace gt

namespace sva {
constexpr int kNouns = 16;  // 0..7 singular, 8..15 plural
constexpr int kVerbPairs = 4;
constexpr int kSgVerbBase = 16, kPlVerbBase = 20;
constexpr int kThe = 24, kBos = 25;
constexpr int kVocab = 26;
constexpr int kNounSlot = 2;
}  // namespace sva

std::string to_string(TaskId t) {
    switch (t) {
        case TaskId::ToyIoi: return "toy-ioi";
        case TaskId::ToyGreaterThan: return "toy-greater-than";
        case TaskId::ToySva: return "toy-sva";
    }
    throw Error("unknown task id");
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Base: return "base";
        case Provenance::Bootstrap: return "bootstrap";
        case Provenance::Meta: return "meta";
        case Provenance::Paraphrase: return "paraphrase";
    }
    throw Error("unknown provenance");
}

TaskId task_from_string(const std::string& s) {
    if (s == "toy-ioi") return TaskId::ToyIoi;
    if (s == "toy-greater-than") return TaskId::ToyGreaterThan;
    if (s == "toy-sva") return TaskId::ToySva;
    throw Error("unknown task '" + s + "'");
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "base") return Provenance::Base;
    if (s == "bootstrap") return Provenance::Bootstrap;
    if (s == "meta") return Provenance::Meta;
    if (s == "paraphrase") return Provenance::Paraphrase;
    throw Error("unknown provenance '" + s + "'");
}

std::vector<int> PromptPair::corruption_slots() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (clean[i] != corrupted[i]) out.push_back(static_cast<int>(i));
    }
    return out;
}

void PromptPair::validate() const {
    if (clean.empty() || clean.size() != corrupted.size()) {
        throw Error("prompt pair: clean/corrupted must be nonempty and equal length");
    }
    if (answers.empty() || foils.empty()) {
        throw Error("prompt pair: answer and foil sets must be nonempty");
    }
    for (int a : answers) {
        if (std::find(foils.begin(), foils.end(), a) != foils.end()) {
            throw Error("prompt pair: answer and foil sets must be disjoint");
        }
    }
}

uint64_t TaskDataset::content_hash() const {
    Fnv1a h;
    h.update("task-dataset-v1");
    h.update(to_string(task));
    h.update_i64(template_id);
    h.update(to_string(provenance));
    h.update_u64(seed);
    for (const PromptPair& p : pairs) {
        for (int t : p.clean) h.update_i64(t);
        for (int t : p.corrupted) h.update_i64(t);
        for (int t : p.answers) h.update_i64(t);
        for (int t : p.foils) h.update_i64(t);
        h.update("|");
    }
    return h.digest();
}

int TaskGenerator::vocab_size() const {
    switch (task_) {
        case TaskId::ToyIoi: return ioi::kVocab;
        case TaskId::ToyGreaterThan: return gt::kVocab;
        case TaskId::ToySva: return sva::kVocab;
    }
    throw Error("unknown task id");
}

int TaskGenerator::context_len() const {
    switch (task_) {
        case TaskId::ToyIoi: return 7;
        case TaskId::ToyGreaterThan: return 6;
        case TaskId::ToySva: return 3;
    }
    throw Error("unknown task id");
}

int TaskGenerator::template_count() const {
    switch (task_) {
        case TaskId::ToyIoi: return ioi::kTemplates;
        case TaskId::ToyGreaterThan: return gt::kTemplates;
        case TaskId::ToySva: return 1;
    }
    throw Error("unknown task id");
}

long TaskGenerator::capacity(int template_id) const {
    if (template_id < 0 || template_id >= template_count()) {
        throw Error("template id " + std::to_string(template_id) + " out of range for " +
                    to_string(task_));
    }
    switch (task_) {
        case TaskId::ToyIoi:
            // ordered (a,b), subject choice, third name
            return static_cast<long>(ioi::kNames) * (ioi::kNames - 1) * 2 * (ioi::kNames - 2);
        case TaskId::ToyGreaterThan: {
            const long years = gt::kYearHi - gt::kYearLo + 1;
            if (template_id == 0) return years * gt::kFillers;
            if (template_id == 1) return years;
            return years * gt::kFillers * gt::kFillers;
        }
        case TaskId::ToySva:
            return static_cast<long>(sva::kNouns) * sva::kVerbPairs;
    }
    throw Error("unknown task id");
}

namespace {

PromptPair make_ioi_pair(int tmpl, int a, int b, int subj_choice, int c) {
    const int x = subj_choice == 0 ? b : a;
    const int other = subj_choice == 0 ? a : b;
    PromptPair p;
    p.clean = ioi::render(tmpl, a, b, x);
    p.corrupted = ioi::render(tmpl, a, b, c);
    p.answers = {other};
    p.foils = {x};
    return p;
}

PromptPair make_gt_pair(int tmpl, int year, int f1, int f2) {
    PromptPair p;
    p.clean = gt::render(tmpl, year, f1, f2);
    p.corrupted = gt::render(tmpl, gt::kMinStartYear, f1, f2);
    for (int y = year + 1; y < gt::kYears; ++y) p.answers.push_back(y);
    for (int y = 0; y <= year; ++y) p.foils.push_back(y);
    return p;
}

PromptPair make_sva_pair(int noun, int verb_pair) {
    const bool plural = noun >= 8;
    PromptPair p;
    p.clean = {sva::kBos, sva::kThe, noun};
    p.corrupted = {sva::kBos, sva::kThe, (noun + 8) % 16};
    const int sg = sva::kSgVerbBase + verb_pair;
    const int pl = sva::kPlVerbBase + verb_pair;
    p.answers = {plural ? pl : sg};
    p.foils = {plural ? sg : pl};
    return p;
}

}  // namespace

TaskDataset TaskGenerator::generate(int n, uint64_t seed, int template_id) const {
    if (n < 1) throw Error("generate_dataset: n must be >= 1");
    const long cap = capacity(template_id);
    if (n > cap) {
        throw Error("generate_dataset: n=" + std::to_string(n) + " exceeds grammar capacity " +
                    std::to_string(cap) + " for " + to_string(task_) + " template " +
                    std::to_string(template_id));
    }

    // Enumerate combos in canonical order, then a seeded shuffle picks n.
    std::vector<long> combos(static_cast<std::size_t>(cap));
    for (long i = 0; i < cap; ++i) combos[static_cast<std::size_t>(i)] = i;
    Rng rng(Rng::mix(seed, 0x9a5f));
    rng.shuffle(combos);

    TaskDataset d;
    d.task = task_;
    d.template_id = template_id;
    d.provenance = Provenance::Base;
    d.seed = seed;
    d.pairs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        long idx = combos[static_cast<std::size_t>(i)];
        switch (task_) {
            case TaskId::ToyIoi: {
                const int c_off = static_cast<int>(idx % (ioi::kNames - 2));
                idx /= (ioi::kNames - 2);
                const int subj = static_cast<int>(idx % 2);
                idx /= 2;
                const int b_off = static_cast<int>(idx % (ioi::kNames - 1));
                const int a = static_cast<int>(idx / (ioi::kNames - 1));
                const int b = b_off >= a ? b_off + 1 : b_off;
                // third name distinct from both
                int c = -1, skipped = 0;
                for (int cand = 0; cand < ioi::kNames; ++cand) {
                    if (cand == a || cand == b) continue;
                    if (skipped == c_off) {
                        c = cand;
                        break;
                    }
                    ++skipped;
                }
                d.pairs.push_back(make_ioi_pair(template_id, a, b, subj, c));
                break;
            }
            case TaskId::ToyGreaterThan: {
                int f1 = 0, f2 = 0;
                if (template_id == 0) {
                    f1 = static_cast<int>(idx % gt::kFillers);
                    idx /= gt::kFillers;
                } else if (template_id == 2) {
                    f2 = static_cast<int>(idx % gt::kFillers);
                    idx /= gt::kFillers;
                    f1 = static_cast<int>(idx % gt::kFillers);
                    idx /= gt::kFillers;
                }
                const int year = gt::kYearLo + static_cast<int>(idx);
                d.pairs.push_back(make_gt_pair(template_id, year, f1, f2));
                break;
            }
            case TaskId::ToySva: {
                const int verb_pair = static_cast<int>(idx % sva::kVerbPairs);
                const int noun = static_cast<int>(idx / sva::kVerbPairs);
                d.pairs.push_back(make_sva_pair(noun, verb_pair));
                break;
            }
        }
        d.pairs.back().validate();
    }
    return d;
}

TaskDataset TaskGenerator::generate_training_mix(int n, uint64_t seed) const {
    if (template_count() == 1) return generate(n, seed, 0);
    const int n_alt = n / 5;
    const int n_base = n - 2 * n_alt;
    TaskDataset d = generate(n_base, Rng::mix(seed, 1), 0);
    for (int t = 1; t <= 2; ++t) {
        if (n_alt == 0) break;
        TaskDataset extra = generate(n_alt, Rng::mix(seed, static_cast<uint64_t>(t) + 1), t);
        d.pairs.insert(d.pairs.end(), extra.pairs.begin(), extra.pairs.end());
    }
    d.template_id = -1;
    d.seed = seed;
    return d;
}

TaskDataset bootstrap_resample(const TaskDataset& d, uint64_t seed) {
    if (d.pairs.empty()) throw Error("bootstrap_resample: empty dataset");
    Rng rng(Rng::mix(seed, 0xb007));
    TaskDataset out;
    out.task = d.task;
    out.template_id = d.template_id;
    out.provenance = Provenance::Bootstrap;
    out.seed = seed;
    out.pairs.reserve(d.pairs.size());
    for (std::size_t i = 0; i < d.pairs.size(); ++i) {
        out.pairs.push_back(d.pairs[rng.index(d.pairs.size())]);
    }
    return out;
}

TaskDataset paraphrase_dataset(const TaskDataset& d, int template_id) {
    TaskGenerator gen(d.task);
    if (!gen.supports_paraphrase()) {
        throw UnsupportedError("paraphrase not implemented for " + to_string(d.task));
    }
    if (template_id < 0 || template_id >= gen.template_count()) {
        throw Error("paraphrase: template id " + std::to_string(template_id) + " out of range");
    }
    if (d.template_id < 0) throw Error("paraphrase: source dataset has mixed templates");
    if (template_id == d.template_id) return d;

    TaskDataset out;
    out.task = d.task;
    out.template_id = template_id;
    out.provenance = Provenance::Paraphrase;
    out.seed = d.seed;
    out.pairs.reserve(d.pairs.size());
    for (const PromptPair& p : d.pairs) {
        PromptPair q;
        q.answers = p.answers;
        q.foils = p.foils;
        if (d.task == TaskId::ToyIoi) {
            int pa = 0, pb = 0, px = 0;
            ioi::slots(d.template_id, pa, pb, px);
            const int a = p.clean[static_cast<std::size_t>(pa)];
            const int b = p.clean[static_cast<std::size_t>(pb)];
            const int x = p.clean[static_cast<std::size_t>(px)];
            const int c = p.corrupted[static_cast<std::size_t>(px)];
            q.clean = ioi::render(template_id, a, b, x);
            q.corrupted = ioi::render(template_id, a, b, c);
        } else {
            const int ys = gt::year_slot(d.template_id);
            const int year = p.clean[static_cast<std::size_t>(ys)];
            const int year_c = p.corrupted[static_cast<std::size_t>(ys)];
            int f1 = 0, f2 = 0;
            if (d.template_id == 0) f1 = p.clean[1] - gt::kFillerBase;
            if (d.template_id == 2) {
                f1 = p.clean[1] - gt::kFillerBase;
                f2 = p.clean[2] - gt::kFillerBase;
            }
            q.clean = gt::render(template_id, year, f1, f2);
            q.corrupted = gt::render(template_id, year_c, f1, f2);
        }
        q.validate();
        out.pairs.push_back(std::move(q));
    }
    return out;
}

double task_metric(const Tensor& logits, const PromptPair& pair, TaskId task) {
    return metric_for(task, pair)->value(logits);
}

std::unique_ptr<Metric> metric_for(TaskId task, const PromptPair& pair) {
    pair.validate();
    if (task == TaskId::ToyGreaterThan) {
        return std::make_unique<ProbDiffMetric>(pair.answers, pair.foils);
    }
    return std::make_unique<LogitDiffMetric>(pair.answers, pair.foils);
}

std::string dataset_to_json(const TaskDataset& d) {
    nlohmann::ordered_json j;
    j["format"] = "cstab-dataset-v1";
    j["task"] = to_string(d.task);
    j["template"] = d.template_id;
    j["provenance"] = to_string(d.provenance);
    j["seed"] = d.seed;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const PromptPair& p : d.pairs) {
        nlohmann::ordered_json jp;
        jp["clean"] = p.clean;
        jp["corrupted"] = p.corrupted;
        jp["answers"] = p.answers;
        jp["foils"] = p.foils;
        pairs.push_back(std::move(jp));
    }
    j["pairs"] = std::move(pairs);
    return j.dump(2) + "\n";
}

TaskDataset dataset_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cstab-dataset-v1") {
        throw Error("dataset file: unknown format");
    }
    TaskDataset d;
    d.task = task_from_string(j.at("task").get<std::string>());
    d.template_id = j.at("template").get<int>();
    d.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    d.seed = j.at("seed").get<uint64_t>();
    for (const auto& jp : j.at("pairs")) {
        PromptPair p;
        p.clean = jp.at("clean").get<std::vector<int>>();
        p.corrupted = jp.at("corrupted").get<std::vector<int>>();
        p.answers = jp.at("answers").get<std::vector<int>>();
        p.foils = jp.at("foils").get<std::vector<int>>();
        p.validate();
        d.pairs.push_back(std::move(p));
    }
    if (d.pairs.empty()) throw Error("dataset file: no pairs");
    return d;
}

}  // namespace cstab
