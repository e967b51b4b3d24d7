#include "gcf/thread_pool.hpp"

namespace gcf {

WorkerPool::WorkerPool(std::size_t workers) {
    for (std::size_t i = 1; i < workers; ++i)
        threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto &t : threads_)
        t.join();
}

void WorkerPool::drain() {
    for (;;) {
        std::size_t i;
        const std::function<void(std::size_t)> *job;
        {
            std::lock_guard lock(mutex_);
            if (next_ >= total_)
                return;
            i = next_++;
            job = job_;
        }
        try {
            (*job)(i);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_)
                error_ = std::current_exception();
            next_ = total_;
        }
    }
}

void WorkerPool::worker_loop() {
    std::size_t seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_)
                return;
            seen = generation_;
            ++active_;
        }
        drain();
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        done_.notify_all();
    }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn) {
    if (threads_.empty() || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        job_ = &fn;
        total_ = n;
        next_ = 0;
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();
    drain();
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return active_ == 0 && next_ >= total_; });
        job_ = nullptr;
        error = error_;
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace gcf
