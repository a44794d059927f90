"""
URL configuration for the genuine-operads project.

The only routes are the JSON API of the ``genop`` app.
"""

from django.urls import path, include

urlpatterns = [
    path("", include("genop.urls")),
]
