"""
The harmonic application: operator-valued Hardy space numerics and their service layer.

The numerical modules (opfield, testfn, square_functions, bmo_carleson, quantum_torus,
experiments, reporting, invariants, serialization) import nothing from Django. Models,
serializers, views and Celery tasks expose them through the REST API and the `opharm`
management command.
"""
