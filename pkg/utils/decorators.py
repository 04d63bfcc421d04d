command_registry = {}
policy_registry = {}


def command(name):
    def decorator(fn):
        command_registry[name] = fn
        return fn
    return decorator


def policy(name):
    def decorator(cls):
        policy_registry[name] = cls
        return cls
    return decorator
