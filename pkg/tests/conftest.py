from hypothesis import settings

# property tests call into quadrature-backed helpers; wall-clock deadlines
# only add flakiness on loaded machines
settings.register_profile("default", deadline=None)
settings.load_profile("default")
