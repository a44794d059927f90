from django.urls import path
from . import views

app_name = "genop"

urlpatterns = [
    # JSON API: one command per request, GET ?command=... or POST JSON
    path("api/run/", views.run_api, name="run"),
]
