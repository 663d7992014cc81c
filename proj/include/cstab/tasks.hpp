#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cstab/metric.hpp"
#include "cstab/tensor.hpp"

namespace cstab {

struct UnsupportedError : Error {
    explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

enum class TaskId { ToyIoi, ToyGreaterThan, ToySva };
enum class Provenance { Base, Bootstrap, Meta, Paraphrase };

std::string to_string(TaskId t);
std::string to_string(Provenance p);
TaskId task_from_string(const std::string& s);
Provenance provenance_from_string(const std::string& s);

// One clean/corrupted input pair. The corrupted sequence differs from the
// clean one only in the task's corruption slot; answers/foils are final-
// position token sets fixed by the clean input.
struct PromptPair {
    std::vector<int> clean;
    std::vector<int> corrupted;
    std::vector<int> answers;
    std::vector<int> foils;

    std::vector<int> corruption_slots() const;
    void validate() const;
};

struct TaskDataset {
    TaskId task = TaskId::ToyIoi;
    int template_id = 0;  // -1 for mixed-template training sets
    Provenance provenance = Provenance::Base;
    uint64_t seed = 0;
    std::vector<PromptPair> pairs;

    int size() const { return static_cast<int>(pairs.size()); }
    uint64_t content_hash() const;
};

// Seeded slot-grammar generators for the three toy tasks.
//
//   toy-ioi           [BOS A B SEP X TO] with X one of {A,B}; predict the
//                     other name; corruption replaces X with a third name.
//   toy-greater-than  [BOS F FROM y TO]; predict any year token > y;
//                     corruption sets y to the minimal start year (01).
//   toy-sva           [BOS THE noun]; predict the verb form agreeing with
//                     the noun's number; corruption toggles the number.
class TaskGenerator {
public:
    explicit TaskGenerator(TaskId task) : task_(task) {}

    TaskId task() const { return task_; }
    int vocab_size() const;
    int context_len() const;  // max template length
    int template_count() const;
    bool supports_paraphrase() const { return template_count() > 1; }
    long capacity(int template_id) const;  // distinct pairs the grammar can emit

    // n distinct pairs, sampled without replacement from the grammar's
    // enumeration; deterministic in (n, seed, template_id).
    TaskDataset generate(int n, uint64_t seed, int template_id = 0) const;

    // Template blend for training (single-template tasks fall back to t0).
    TaskDataset generate_training_mix(int n, uint64_t seed) const;

private:
    TaskId task_;
};

// Same-size resample with replacement; pairs move as atoms.
TaskDataset bootstrap_resample(const TaskDataset& d, uint64_t seed);

// Re-render every pair's carrier tokens under another template; slot values
// and answer specs are preserved. Unsupported for toy-sva.
TaskDataset paraphrase_dataset(const TaskDataset& d, int template_id);

// Larger = more task-correct. Logit difference for toy-ioi / toy-sva,
// probability difference for toy-greater-than.
double task_metric(const Tensor& logits, const PromptPair& pair, TaskId task);
std::unique_ptr<Metric> metric_for(TaskId task, const PromptPair& pair);

std::string dataset_to_json(const TaskDataset& d);
TaskDataset dataset_from_json(const std::string& text);

}  // namespace cstab
