#include "hdprof/profile.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "hdprof/classifier.hpp"
#include "hdprof/encoder.hpp"
#include "hdprof/errors.hpp"

namespace hdprof {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct InputBatch {
  std::uint64_t seq = 0;
  std::vector<SequenceRecord> records;
};

struct ReadResult {
  ReadClassification cls;
  std::vector<std::size_t> slots;
  std::optional<HDVector> query;
};

struct OutputBatch {
  std::vector<ReadResult> results;
  std::uint64_t bases = 0;
};

class Pipeline {
 public:
  Pipeline(const HDRefDB& db, const Encoder& encoder, const TaxonTable& table, double threshold,
           const ProfileOptions& options)
      : db_(db),
        encoder_(encoder),
        table_(table),
        threshold_(threshold),
        keep_queries_(options.query_store.has_value()),
        batch_size_(std::max<std::size_t>(1, options.batch_size)),
        workers_(std::max(1U, options.threads)),
        max_in_flight_(2 * workers_ + 2) {}

  template <class Sink>
  void run(RecordStream& reads, Sink&& sink) {
    std::thread reader([&] { read_loop(reads); });
    std::vector<std::thread> pool;
    pool.reserve(workers_);
    for (unsigned i = 0; i < workers_; ++i) pool.emplace_back([&] { work_loop(); });

    try {
      merge_loop(sink);
    } catch (...) {
      fail(std::current_exception());
    }
    reader.join();
    for (auto& t : pool) t.join();
    if (error_) std::rethrow_exception(error_);
  }

  double encode_seconds = 0.0;
  double classify_seconds = 0.0;

 private:
  void fail(std::exception_ptr e) {
    std::lock_guard lock(mu_);
    if (!error_) error_ = e;
    aborted_ = true;
    cv_.notify_all();
  }

  void read_loop(RecordStream& reads) {
    try {
      std::uint64_t seq = 0;
      for (;;) {
        InputBatch batch;
        batch.seq = seq;
        batch.records.reserve(batch_size_);
        while (batch.records.size() < batch_size_) {
          auto rec = reads.next();
          if (!rec) break;
          batch.records.push_back(std::move(*rec));
        }
        const bool last = batch.records.size() < batch_size_;
        if (!batch.records.empty()) {
          std::unique_lock lock(mu_);
          cv_.wait(lock, [&] { return aborted_ || in_flight_ < max_in_flight_; });
          if (aborted_) return;
          ++in_flight_;
          input_.push_back(std::move(batch));
          ++seq;
          cv_.notify_all();
        }
        if (last) break;
      }
      std::lock_guard lock(mu_);
      batches_total_ = seq;
      reading_done_ = true;
      cv_.notify_all();
    } catch (...) {
      fail(std::current_exception());
    }
  }

  void work_loop() {
    try {
      WindowBundler bundler(encoder_);
      for (;;) {
        InputBatch batch;
        {
          std::unique_lock lock(mu_);
          cv_.wait(lock, [&] { return aborted_ || !input_.empty() || reading_done_; });
          if (aborted_ || input_.empty()) return;
          batch = std::move(input_.front());
          input_.pop_front();
        }
        OutputBatch out;
        out.results.reserve(batch.records.size());
        double enc = 0.0;
        double cls = 0.0;
        for (auto& rec : batch.records) {
          out.bases += rec.bases.size();
          ReadResult r;
          const auto t0 = Clock::now();
          bundler.reset();
          bundler.feed(rec.bases);
          if (bundler.windows() == 0) {
            enc += seconds_since(t0);
            r.cls = unencodable(std::move(rec.id));
          } else {
            HDVector q = bundler.finish();
            const auto t1 = Clock::now();
            enc += std::chrono::duration<double>(t1 - t0).count();
            r.cls = classify(q, db_, threshold_);
            r.cls.read_id = std::move(rec.id);
            r.slots = matched_taxa(r.cls, table_);
            cls += seconds_since(t1);
            if (keep_queries_) r.query = std::move(q);
          }
          out.results.push_back(std::move(r));
        }
        std::lock_guard lock(mu_);
        encode_seconds += enc;
        classify_seconds += cls;
        done_.emplace(batch.seq, std::move(out));
        cv_.notify_all();
      }
    } catch (...) {
      fail(std::current_exception());
    }
  }

  template <class Sink>
  void merge_loop(Sink& sink) {
    for (std::uint64_t next = 0;; ++next) {
      OutputBatch batch;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] {
          return aborted_ || done_.count(next) != 0 || (reading_done_ && next >= batches_total_);
        });
        if (aborted_) return;
        auto it = done_.find(next);
        if (it == done_.end()) return;
        batch = std::move(it->second);
        done_.erase(it);
        --in_flight_;
        cv_.notify_all();
      }
      sink(batch);
    }
  }

  const HDRefDB& db_;
  const Encoder& encoder_;
  const TaxonTable& table_;
  double threshold_;
  bool keep_queries_;
  std::size_t batch_size_;
  unsigned workers_;
  std::size_t max_in_flight_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<InputBatch> input_;
  std::map<std::uint64_t, OutputBatch> done_;
  std::size_t in_flight_ = 0;
  std::uint64_t batches_total_ = 0;
  bool reading_done_ = false;
  bool aborted_ = false;
  std::exception_ptr error_;
};

void write_per_read_line(std::ostream& out, const ReadResult& r, const HDRefDB& db, const TaxonTable& table) {
  out << r.cls.read_id << '\t' << category_name(category_for(r.slots.size())) << '\t';
  if (r.slots.empty()) {
    out << '-';
  } else {
    for (std::size_t i = 0; i < r.slots.size(); ++i) {
      if (i) out << ',';
      out << table.taxa[r.slots[i]].taxon_id;
    }
  }
  if (r.cls.best == ReadClassification::npos) {
    out << "\t-\t-\n";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", r.cls.scores[r.cls.best]);
  out << '\t' << db.records[r.cls.best].taxon_id << '\t' << buf << '\n';
}

}  // namespace

void write_per_read_header(std::ostream& out) {
  out << "read_id\tcategory\tmatched_taxa\tbest_taxon\tbest_score\n";
}

ProfileResult run_profile(const HDRefDB& db, const ItemMemory& im, RecordStream& reads,
                          const ProfileOptions& options) {
  const auto t0 = Clock::now();
  ProfileResult result;
  result.threshold = options.threshold.value_or(db.config.similarity_threshold);
  if (!(result.threshold >= 0.0 && result.threshold <= 1.0)) {
    throw ConfigFormatError("threshold must lie in [0, 1]");
  }
  const Encoder encoder(db.config, im);
  AbundanceEstimator estimator(db);
  const TaxonTable& table = estimator.table();

  std::optional<QueryStoreWriter> store;
  if (options.query_store) store.emplace(*options.query_store, db.fingerprint(), db.dimension());
  if (options.per_read) write_per_read_header(*options.per_read);

  Pipeline pipeline(db, encoder, table, result.threshold, options);
  double estimate_seconds = 0.0;
  pipeline.run(reads, [&](OutputBatch& batch) {
    const auto te = Clock::now();
    result.bases += batch.bases;
    for (const auto& r : batch.results) {
      ++result.reads;
      if (r.cls.scores.empty()) ++result.unencodable;
      estimator.add_taxa(r.slots);
      if (options.per_read) write_per_read_line(*options.per_read, r, db, table);
      if (store && r.query) store->append(r.cls.read_id, *r.query);
    }
    estimate_seconds += seconds_since(te);
  });
  if (options.per_read && !*options.per_read) throw IoError("failed writing per-read output");

  const auto tf = Clock::now();
  result.profile = estimator.finish();
  estimate_seconds += seconds_since(tf);
  if (store) {
    result.stored_queries = store->count();
    store->close();
  }
  result.timings.encode_seconds = pipeline.encode_seconds;
  result.timings.classify_seconds = pipeline.classify_seconds;
  result.timings.estimate_seconds = estimate_seconds;
  result.timings.wall_seconds = seconds_since(t0);
  return result;
}

}  // namespace hdprof
