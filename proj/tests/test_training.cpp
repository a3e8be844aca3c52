#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include "sparselab/training.hpp"

using namespace sparselab;

namespace {

Eigen::MatrixXd random_activations(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    return a;
}

template <typename LossFn, typename GradFn>
double fd_matrix_error(const Eigen::MatrixXd& a, LossFn loss, GradFn grad) {
    Eigen::MatrixXd g = grad(a);
    Eigen::MatrixXd work = a;
    const double eps = 1e-4;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < work.size(); ++i) {
        double saved = work.data()[i];
        work.data()[i] = saved + eps;
        double up = loss(work);
        work.data()[i] = saved - eps;
        double down = loss(work);
        work.data()[i] = saved;
        double fd = (up - down) / (2.0 * eps);
        double denom = std::max({std::abs(fd), std::abs(g.data()[i]), 1e-6});
        worst = std::max(worst, std::abs(fd - g.data()[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("flops loss hand values") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 3, 4;
    CHECK(flops_loss(a) == doctest::Approx(13.0).epsilon(1e-12));
    CHECK(flops_loss(Eigen::MatrixXd::Zero(3, 5)) == 0.0);
    Eigen::MatrixXd row(1, 3);
    row << 1, 2, 3;
    CHECK(flops_loss(row) == doctest::Approx(14.0));  // single row: sum of squares
    Eigen::MatrixXd neg(1, 1);
    neg << -1;
    CHECK_THROWS_AS(flops_loss(neg), std::invalid_argument);
}

TEST_CASE("l1 loss hand values") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 3, 4;
    CHECK(l1_loss(a) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(l1_loss(Eigen::MatrixXd::Zero(2, 4)) == 0.0);
}

TEST_CASE("regularizer homogeneity: flops degree 2, l1 degree 1") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd a = random_activations(rng, 3, 7);
        double c = 3.5;
        CHECK(flops_loss(c * a) == doctest::Approx(c * c * flops_loss(a)).epsilon(1e-12));
        CHECK(l1_loss(c * a) == doctest::Approx(c * l1_loss(a)).epsilon(1e-12));
    }
}

TEST_CASE("kl distillation hand values and invariances") {
    Eigen::VectorXd t(2), s(2);
    t << 0.0, std::log(3.0);
    s << 0.0, 0.0;
    // p=(0.25,0.75), q=(0.5,0.5): KL = 0.25 ln 0.5 + 0.75 ln 1.5
    CHECK(kl_distill_loss(t, s) == doctest::Approx(0.130812).epsilon(1e-5));

    CHECK(kl_distill_loss(t, t) == doctest::Approx(0.0).epsilon(1e-15));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd teacher(4), student(4);
        for (int i = 0; i < 4; ++i) {
            teacher[i] = u(rng);
            student[i] = u(rng);
        }
        double base = kl_distill_loss(teacher, student);
        Eigen::VectorXd shifted = student.array() + 7.25;
        CHECK(kl_distill_loss(teacher, shifted) == doctest::Approx(base).epsilon(1e-12));
        Eigen::VectorXd tshift = teacher.array() - 3.5;
        CHECK(kl_distill_loss(tshift, student) == doctest::Approx(base).epsilon(1e-12));
        CHECK(base >= 0.0);
    }

    Eigen::VectorXd single(1);
    single << 1.0;
    CHECK_THROWS_AS(kl_distill_loss(single, single), std::invalid_argument);
}

TEST_CASE("loss gradients match finite differences") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd a = random_activations(rng, 4, 6);
        CHECK(fd_matrix_error(a, [](const Eigen::MatrixXd& m) { return flops_loss(m); },
                              [](const Eigen::MatrixXd& m) { return flops_loss_grad(m); }) < 1e-3);
        CHECK(fd_matrix_error(a, [](const Eigen::MatrixXd& m) { return l1_loss(m); },
                              [](const Eigen::MatrixXd& m) { return l1_loss_grad(m); }) < 1e-3);
    }
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd teacher(5), student(5);
        for (int i = 0; i < 5; ++i) {
            teacher[i] = u(rng);
            student[i] = u(rng);
        }
        Eigen::VectorXd g = kl_distill_grad(teacher, student);
        const double eps = 1e-4;
        for (int i = 0; i < 5; ++i) {
            Eigen::VectorXd probe = student;
            probe[i] += eps;
            double up = kl_distill_loss(teacher, probe);
            probe[i] -= 2 * eps;
            double down = kl_distill_loss(teacher, probe);
            double fd = (up - down) / (2 * eps);
            CHECK(std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6}) < 1e-3);
        }
    }
}

TEST_CASE("lambda schedule") {
    LambdaSchedule s{0.4, 100};
    CHECK(s.at(0) == 0.0);
    CHECK(s.at(50) == doctest::Approx(0.1).epsilon(1e-15));  // target / 4 at T/2
    CHECK(s.at(100) == 0.4);
    CHECK(s.at(250) == 0.4);
    double prev = -1.0;
    for (int t = 0; t <= 200; ++t) {
        CHECK(s.at(t) >= prev);
        prev = s.at(t);
    }
}

TEST_CASE("synthetic task is deterministic with positive teacher scores") {
    SyntheticTask a = build_synthetic_task(7, 64, 30, 10, 5, 3);
    SyntheticTask b = build_synthetic_task(7, 64, 30, 10, 5, 3);
    REQUIRE(a.docs.size() == 30);
    REQUIRE(a.train_queries.size() == 10);
    REQUIRE(a.heldout_queries.size() == 5);
    CHECK(a.docs == b.docs);
    for (std::size_t i = 0; i < a.train_queries.size(); ++i) {
        CHECK(a.train_queries[i].tokens == b.train_queries[i].tokens);
        CHECK(a.train_queries[i].candidates == b.train_queries[i].candidates);
        CHECK(a.train_queries[i].teacher_scores == b.train_queries[i].teacher_scores);
        CHECK(a.train_queries[i].teacher_scores[0] > 0.0);  // lexical match by construction
    }
    CHECK(build_synthetic_task(8, 64, 30, 10, 5, 3).docs != a.docs);
}

TEST_CASE("joint loss degenerates to distillation when lambdas vanish") {
    SyntheticTask task = build_synthetic_task(3, 32, 20, 6, 2, 3);
    TrainConfig config;
    config.vocab_size = 32;
    config.hidden_q = 2;
    config.hidden_d = 3;
    config.seed = 3;
    std::mt19937_64 rng(3);
    EncoderPair pair;
    pair.doc = EncoderParams::random(32, 3, true, rng);
    pair.query = EncoderParams::random(32, 2, true, rng);

    TrainingBatch batch;
    batch.queries = {&task.train_queries[0], &task.train_queries[1]};

    config.lambda_q = 0.0;
    config.lambda_d = 0.0;
    LossParts parts = joint_loss(batch, task, pair, 1000, config);
    CHECK(parts.total == parts.distill);

    // scheduler zeroes both lambdas at t = 0
    config.lambda_q = 0.5;
    config.lambda_d = 0.5;
    config.scheduler_steps = 100;
    LossParts at_zero = joint_loss(batch, task, pair, 0, config);
    CHECK(at_zero.total == at_zero.distill);

    // and applies them fully past the warmup
    LossParts late = joint_loss(batch, task, pair, 100, config);
    CHECK(late.total ==
          doctest::Approx(late.distill + 0.5 * late.q_reg + 0.5 * late.d_reg).epsilon(1e-12));
}

TEST_CASE("joint loss gradient matches finite differences") {
    SyntheticTask task = build_synthetic_task(13, 16, 12, 4, 2, 3);
    TrainConfig config;
    config.vocab_size = 16;
    config.hidden_q = 2;
    config.hidden_d = 2;
    config.lambda_q = 0.3;
    config.lambda_d = 0.2;
    config.scheduler_steps = 10;
    config.q_reg = RegularizerKind::L1;
    config.d_reg = RegularizerKind::Flops;

    for (bool shared : {false, true}) {
        config.shared_encoders = shared;
        std::mt19937_64 rng(13);
        EncoderPair pair;
        pair.shared = shared;
        pair.doc = EncoderParams::random(16, 2, true, rng);
        pair.query = shared ? pair.doc : EncoderParams::random(16, 2, true, rng);

        TrainingBatch batch;
        batch.queries = {&task.train_queries[0], &task.train_queries[1]};

        PairGrads grads{EncoderGrads::zeros_like(pair.query), EncoderGrads::zeros_like(pair.doc)};
        joint_loss(batch, task, pair, 25, config, &grads);

        const double eps = 1e-4;
        auto loss_at = [&](const EncoderPair& p) {
            return joint_loss(batch, task, p, 25, config).total;
        };
        // probe a few coordinates of each tensor
        std::uniform_int_distribution<int> coord(0, static_cast<int>(pair.doc.projection.size()) - 1);
        for (int probe = 0; probe < 12; ++probe) {
            int i = coord(rng);
            EncoderPair work = pair;
            work.doc.projection.data()[i] += eps;
            if (shared) work.query = work.doc;
            double up = loss_at(work);
            work = pair;
            work.doc.projection.data()[i] -= eps;
            if (shared) work.query = work.doc;
            double down = loss_at(work);
            double fd = (up - down) / (2 * eps);
            double g = grads.doc.projection.data()[i];
            CHECK(std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6}) < 1e-3);
        }
        if (!shared) {
            for (int probe = 0; probe < 8; ++probe) {
                int i = coord(rng);
                EncoderPair work = pair;
                work.query.projection.data()[i] += eps;
                double up = loss_at(work);
                work.query.projection.data()[i] -= 2 * eps;
                double down = loss_at(work);
                double fd = (up - down) / (2 * eps);
                double g = grads.query.projection.data()[i];
                CHECK(std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6}) < 1e-3);
            }
        }
    }
}

TEST_CASE("splade-doc batches skip the query encoder and regularizer") {
    SyntheticTask task = build_synthetic_task(19, 16, 12, 4, 2, 3);
    TrainConfig config;
    config.vocab_size = 16;
    config.hidden_d = 2;
    config.hidden_q = 2;
    config.splade_doc = true;
    config.lambda_q = 1.0;
    config.scheduler_steps = 1;
    std::mt19937_64 rng(19);
    EncoderPair pair;
    pair.doc = EncoderParams::random(16, 2, true, rng);
    pair.query = pair.doc;
    TrainingBatch batch;
    batch.queries = {&task.train_queries[0], &task.train_queries[1]};
    LossParts parts = joint_loss(batch, task, pair, 100, config);
    CHECK(parts.q_reg == 0.0);
    std::set<TermId> distinct(task.train_queries[0].tokens.begin(),
                              task.train_queries[0].tokens.end());
    CHECK(parts.mean_q_nnz ==
          doctest::Approx((static_cast<double>(distinct.size()) +
                           static_cast<double>(std::set<TermId>(task.train_queries[1].tokens.begin(),
                                                                task.train_queries[1].tokens.end())
                                                   .size())) /
                          2.0));
}

TEST_CASE("training is deterministic for a fixed seed") {
    SyntheticTask task = build_synthetic_task(7, 32, 40, 12, 4, 3);
    TrainConfig config;
    config.vocab_size = 32;
    config.hidden_q = 2;
    config.hidden_d = 3;
    config.steps = 25;
    config.batch_size = 2;
    config.seed = 7;
    TrainRun a = train_loop(config, task);
    TrainRun b = train_loop(config, task);
    REQUIRE(a.history.size() == 25);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].total == b.history[i].total);  // bit-identical
        CHECK(a.history[i].distill == b.history[i].distill);
    }
    CHECK(a.encoders.doc.projection == b.encoders.doc.projection);
    CHECK(a.encoders.query.projection == b.encoders.query.projection);
}

TEST_CASE("training requires a seed and splade-doc shortens the run") {
    SyntheticTask task = build_synthetic_task(7, 32, 20, 6, 2, 3);
    TrainConfig config;
    config.vocab_size = 32;
    config.steps = 50;
    CHECK_THROWS_AS(train_loop(config, task), std::invalid_argument);

    config.seed = 7;
    config.splade_doc = true;
    config.hidden_q = config.hidden_d = 2;
    config.batch_size = 2;
    TrainRun run = train_loop(config, task);
    CHECK(run.history.size() == 10);  // 50 steps at the default 1:5 ratio
}

TEST_CASE("config file parsing and presets") {
    {
        std::ofstream out("train.cfg");
        out << "# comment\n";
        out << "preset=S\n";
        out << "seed=42\n";
        out << "steps=123\n";
    }
    TrainConfig config = TrainConfig::from_file("train.cfg");
    CHECK(config.lambda_q == 5e-3);
    CHECK(config.lambda_d == 5e-3);
    CHECK(config.q_reg == RegularizerKind::L1);
    CHECK(config.steps == 123);
    CHECK(config.seed == 42);
    std::remove("train.cfg");

    TrainConfig flops;
    flops.apply_preset("S-flops");
    CHECK(flops.lambda_q == 0.1);
    CHECK(flops.lambda_d == 5e-3);
    CHECK(flops.q_reg == RegularizerKind::Flops);
    TrainConfig m;
    m.apply_preset("M");
    CHECK(m.lambda_q == 5e-4);
    CHECK_THROWS_AS(m.apply_preset("XL"), std::invalid_argument);

    // round-trip through serialization
    {
        std::ofstream out("train2.cfg");
        out << config.to_text();
    }
    TrainConfig back = TrainConfig::from_file("train2.cfg");
    CHECK(back.lambda_q == config.lambda_q);
    CHECK(back.steps == config.steps);
    CHECK(back.seed == config.seed);
    std::remove("train2.cfg");
}

TEST_CASE("loss csv output") {
    std::vector<LossRow> history{{0, 1.0, 0.5, 0.25, 0.25, 0.0, 0.0, 3.0, 9.0}};
    write_loss_csv(history, "loss.csv");
    std::ifstream in("loss.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,total,distill,q_reg,d_reg,lambda_q,lambda_d,mean_q_nnz,mean_d_nnz");
    std::string row;
    CHECK(static_cast<bool>(std::getline(in, row)));
    std::remove("loss.csv");
}
