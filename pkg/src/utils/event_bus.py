"""
EventBus - 事件总线模块

本模块实现线程安全的发布-订阅事件总线。Monte Carlo 实验通过它报告进度、
被排除的试验与告警，CLI 订阅这些事件输出进度信息。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import logging
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional


logger = logging.getLogger(__name__)


class EventType(Enum):
    """
    事件类型枚举

    实验生命周期中发布的事件。
    """
    EXPERIMENT_STARTED = "experiment_started"
    EXPERIMENT_PROGRESS = "experiment_progress"
    TRIAL_EXCLUDED = "trial_excluded"
    EXPERIMENT_WARNING = "experiment_warning"
    EXPERIMENT_COMPLETED = "experiment_completed"


@dataclass
class Event:
    """
    事件数据类

    Attributes:
        type: 事件类型
        data: 事件携带的数据
        timestamp: 事件创建时间戳
    """
    type: EventType
    data: Dict[str, Any]
    timestamp: float = field(default_factory=time.time)


class EventBus:
    """
    事件总线单例类

    采用双重检查锁定保证单例创建的线程安全；回调在发布线程中同步执行，
    单个回调抛出的异常被记录，不影响其它订阅者。

    Example:
        >>> bus = EventBus()
        >>> bus.subscribe(EventType.EXPERIMENT_PROGRESS, lambda e: print(e.data["completed"]))
        >>> bus.publish(Event(type=EventType.EXPERIMENT_PROGRESS, data={"completed": 10}))
        10
    """

    _instance = None
    _lock = threading.Lock()

    def __new__(cls) -> 'EventBus':
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
                    cls._instance._subscribers: Dict[EventType, List[Callable]] = {}
                    cls._instance._event_lock = threading.Lock()
                    logger.debug("EventBus singleton instance created")
        return cls._instance

    def subscribe(self, event_type: EventType, callback: Callable[[Event], None]) -> None:
        """
        订阅事件

        Raises:
            TypeError: callback 不可调用
        """
        if not callable(callback):
            raise TypeError(f"Callback must be callable, got {type(callback)}")

        with self._event_lock:
            self._subscribers.setdefault(event_type, []).append(callback)
            logger.debug(f"Subscribed to {event_type.value}: {getattr(callback, '__name__', callback)}")

    def unsubscribe(self, event_type: EventType, callback: Callable[[Event], None]) -> bool:
        """
        取消订阅

        Returns:
            bool: 成功移除返回 True
        """
        with self._event_lock:
            try:
                self._subscribers.get(event_type, []).remove(callback)
                return True
            except ValueError:
                logger.warning(f"Callback not found in {event_type.value} subscribers")
                return False

    def publish(self, event: Event) -> None:
        """发布事件给该类型的所有订阅者（在锁外执行回调）"""
        with self._event_lock:
            subscribers = self._subscribers.get(event.type, []).copy()

        if not subscribers:
            return

        logger.debug(f"Publishing event: {event.type.value} to {len(subscribers)} subscribers")
        for callback in subscribers:
            try:
                callback(event)
            except Exception as e:
                logger.error(
                    f"Error in event callback '{getattr(callback, '__name__', callback)}' "
                    f"for event '{event.type.value}': {e}",
                    exc_info=True
                )

    def emit(self, event_type: EventType, **data: Any) -> None:
        """publish 的便捷形式"""
        self.publish(Event(type=event_type, data=data))

    def clear_subscribers(self, event_type: Optional[EventType] = None) -> None:
        """清除某类型（或全部）订阅者"""
        with self._event_lock:
            if event_type is None:
                self._subscribers.clear()
            else:
                self._subscribers.pop(event_type, None)

    def get_subscriber_count(self, event_type: EventType) -> int:
        with self._event_lock:
            return len(self._subscribers.get(event_type, []))
