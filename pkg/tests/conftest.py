from hypothesis import settings

# numba compiles on first call; keep hypothesis from timing that out
settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")
