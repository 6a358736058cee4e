"""
Observable Types
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import wraps
import time
from typing import Any, Callable, Dict, List, Protocol, Type


# `@observable` class decorator
# wraps the named pipeline stages with callback execution
def observable(stage_names: List[str]):
    """
    Class decorator that lets observers follow the named stage
    methods. Registered callbacks run after a stage returns.

    :param stage_names: The method names to make observable
    :type stage_names: list[str]
    """
    return lambda cls: make_observable(cls, stage_names)


def observed_method(method):
    """
    Method decorator that runs the registered callbacks once the
    method has returned

    :param method: The method to decorate
    :type method: Callable
    :return: The decorated method
    :rtype: Callable
    :raises TypeError: if the method is already observed
    """
    if getattr(method, '__is_observable', False):
        raise TypeError(f"Method {method} is already observable.")

    @wraps(method)
    def observable_method(self, *args, **kwargs):
        started = time.perf_counter()
        return_value = method(self, *args, **kwargs)
        method_input: Dict[int | str, Any] = dict(enumerate(args))
        method_input.update(kwargs)
        self.execute_callbacks(
            method.__name__,
            method_input,
            return_value,
            time.perf_counter() - started
        )
        return return_value
    observable_method.__is_observable = True
    return observable_method


def make_observable(cls: Type, stage_names: List[str]):
    """
    Wrap each named method of `cls` with
    :py:func:`mtfl.observable_types.observed_method`

    :param cls: The class to make observable
    :type cls: type
    :param stage_names: Methods to wrap
    :type stage_names: list[str]
    :raises AttributeError: if a name is not a method of `cls`
    """
    for name in stage_names:
        attribute = getattr(cls, name)
        if not callable(attribute):
            raise AttributeError(f"{cls.__name__}.{name} is not a method")
        setattr(cls, name, observed_method(attribute))
    cls.observable_methods = frozenset(stage_names)
    return cls
# end of observable class decorator functions


class ObserverCallback(Protocol):
    """
    Protocol for a callback function

    :param data: Details of the stage that just finished
    :type data: :py:class:`mtfl.observable_types.CallbackData`
    """
    def __call__(self, data: CallbackData): ...


@dataclass(kw_only=True)
class CallbackData:
    """
    What an observer learns about a finished stage

    :param caller: The object executing the callback
    :type caller: object
    :param attribute_name: The stage method that finished
    :type attribute_name: str
    :param input_data: Positional and keyword arguments of the call
    :type input_data: dict
    :param output_data: The stage's return value
    :type output_data: :py:class:`typing.Any`
    :param elapsed: Wall time of the stage in seconds
    :type elapsed: float
    """
    caller: object
    attribute_name: str
    input_data: Dict[int | str, Any]
    output_data: Any
    elapsed: float = 0.0


class ObservableMixin:
    """
    Callback registry for a class decorated with
    :py:func:`mtfl.observable_types.observable`. Callbacks run in
    registration order and must not change stage results.
    """
    observable_methods: frozenset = frozenset()

    @property
    def callbacks(self) -> Dict[str, List[Callable]]:
        """
        Get registered callbacks

        :type: dict[str, list[:py:class:`typing.Callable`]]
        """
        if getattr(self, '_callbacks', None) is None:
            self._callbacks = {x: [] for x in self.observable_methods}
        return self._callbacks

    def add_callback(self, attribute_name: str, callback: ObserverCallback):
        """
        Register a callback to run after a stage

        :param attribute_name: Name of the stage method
        :type attribute_name: str
        :param callback: The callback to register
        :type callback: :py:class:`mtfl.observable_types.ObserverCallback`
        :raises KeyError: if the stage is not observable
        """
        if attribute_name not in self.observable_methods:
            raise KeyError(f"'{attribute_name}' is not observable")
        if callback not in self.callbacks[attribute_name]:
            self.callbacks[attribute_name].append(callback)

    def add_callback_all(self, callback: ObserverCallback):
        for name in sorted(self.observable_methods):
            self.add_callback(name, callback)

    def remove_callback(self, attribute_name: str, callback: ObserverCallback):
        self.callbacks[attribute_name].remove(callback)

    def clear_callbacks(self):
        for name in self.observable_methods:
            self.callbacks[name] = []

    def execute_callbacks(self, attr_name, input_, output, elapsed=0.0):
        """
        Execute all callbacks registered to a stage

        :param attr_name: Name of the stage
        :type attr_name: str
        :param input_: The stage's arguments
        :type input_: dict
        :param output: The stage's return value
        :type output: :py:class:`typing.Any`
        :param elapsed: Wall time of the stage
        :type elapsed: float
        """
        for callback in list(self.callbacks.get(attr_name, [])):
            callback(
                CallbackData(
                    caller=self,
                    attribute_name=attr_name,
                    input_data=input_,
                    output_data=output,
                    elapsed=elapsed,
                )
            )
