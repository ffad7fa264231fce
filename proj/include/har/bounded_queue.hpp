#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

namespace har
{
// Multi-producer/consumer FIFO that never blocks producers: when full, the
// oldest element is discarded and counted.
template<typename T> class BoundedQueue
{
 public:
   explicit BoundedQueue(std::size_t capacity)
       : capacity_(capacity == 0 ? 1 : capacity)
   {}

   void push(T value)
   {
      {
         std::lock_guard lock(mutex_);
         if(items_.size() == capacity_) {
            items_.pop_front();
            ++dropped_;
         }
         items_.push_back(std::move(value));
      }
      ready_.notify_one();
   }

   std::optional<T> try_pop()
   {
      std::lock_guard lock(mutex_);
      if(items_.empty()) return std::nullopt;
      T v = std::move(items_.front());
      items_.pop_front();
      return v;
   }

   // Blocks until an element arrives or the queue is closed and drained.
   std::optional<T> pop()
   {
      std::unique_lock lock(mutex_);
      ready_.wait(lock, [&] { return !items_.empty() || closed_; });
      if(items_.empty()) return std::nullopt;
      T v = std::move(items_.front());
      items_.pop_front();
      return v;
   }

   void close()
   {
      {
         std::lock_guard lock(mutex_);
         closed_ = true;
      }
      ready_.notify_all();
   }

   std::size_t dropped() const
   {
      std::lock_guard lock(mutex_);
      return dropped_;
   }

   std::size_t size() const
   {
      std::lock_guard lock(mutex_);
      return items_.size();
   }

 private:
   mutable std::mutex mutex_;
   std::condition_variable ready_;
   std::deque<T> items_;
   std::size_t capacity_;
   std::size_t dropped_ = 0;
   bool closed_         = false;
};

} // namespace har
